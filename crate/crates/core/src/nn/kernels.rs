//! Dense vector kernels.
//!
//! Reductions use a fixed eight-lane accumulator so that results are
//! bitwise reproducible and the compiler can still vectorize them.

const LANES: usize = 8;

#[inline]
pub fn dot(a: &[f32], b: &[f32]) -> f32 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f32; LANES];
    let ca = a.chunks_exact(LANES);
    let cb = b.chunks_exact(LANES);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..LANES {
            acc[l] += x[l] * y[l];
        }
    }
    let mut tail = 0.0f32;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    let s0 = (acc[0] + acc[4]) + (acc[1] + acc[5]);
    let s1 = (acc[2] + acc[6]) + (acc[3] + acc[7]);
    (s0 + s1) + tail
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f32, x: &[f32], y: &mut [f32]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `y += x^T W` for `W` stored as `[x.len(), y.len()]`. Zero inputs are skipped.
#[inline]
pub fn vecmat_acc(x: &[f32], w: &[f32], y: &mut [f32]) {
    let cols = y.len();
    debug_assert_eq!(w.len(), x.len() * cols);
    for (xi, row) in x.iter().zip(w.chunks_exact(cols)) {
        if *xi != 0.0 {
            axpy(*xi, row, y);
        }
    }
}

/// `dx += W dy` for `W` stored as `[dx.len(), dy.len()]`.
#[inline]
pub fn matvec_acc(w: &[f32], dy: &[f32], dx: &mut [f32]) {
    let cols = dy.len();
    debug_assert_eq!(w.len(), dx.len() * cols);
    for (dxi, row) in dx.iter_mut().zip(w.chunks_exact(cols)) {
        *dxi += dot(row, dy);
    }
}

/// `dW += x dy^T` for `dW` stored as `[x.len(), dy.len()]`. Zero inputs are skipped.
#[inline]
pub fn outer_acc(x: &[f32], dy: &[f32], dw: &mut [f32]) {
    let cols = dy.len();
    debug_assert_eq!(dw.len(), x.len() * cols);
    for (xi, row) in x.iter().zip(dw.chunks_exact_mut(cols)) {
        if *xi != 0.0 {
            axpy(*xi, dy, row);
        }
    }
}

#[inline]
pub fn sigmoid(x: f32) -> f32 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn add_into(src: &[f32], dst: &mut [f32]) {
    debug_assert_eq!(src.len(), dst.len());
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_matches_naive() {
        let a: Vec<f32> = (0..19).map(|i| i as f32 * 0.5).collect();
        let b: Vec<f32> = (0..19).map(|i| 1.0 - i as f32 * 0.1).collect();
        let naive: f64 = a.iter().zip(&b).map(|(x, y)| f64::from(*x) * f64::from(*y)).sum();
        assert!((f64::from(dot(&a, &b)) - naive).abs() < 1e-4);
    }

    #[test]
    fn vecmat_and_matvec_agree_with_loops() {
        // W is 2x3
        let w = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let mut y = [0.0; 3];
        vecmat_acc(&[1.0, -1.0], &w, &mut y);
        assert_eq!(y, [-3.0, -3.0, -3.0]);
        let mut dx = [0.0; 2];
        matvec_acc(&w, &[1.0, 0.0, 1.0], &mut dx);
        assert_eq!(dx, [4.0, 10.0]);
        let mut dw = [0.0; 6];
        outer_acc(&[2.0, 0.0], &[1.0, 2.0, 3.0], &mut dw);
        assert_eq!(dw, [2.0, 4.0, 6.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-1000.0) >= 0.0 && sigmoid(1000.0) <= 1.0);
        assert!(sigmoid(-1000.0).is_finite());
    }
}
