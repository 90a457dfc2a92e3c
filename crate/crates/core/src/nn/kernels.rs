//! Dense kernels shared by the tape and the tape-free inference path.
//!
//! All matrices are row-major `f64`. Products go through `matrixmultiply`,
//! which is single-threaded and deterministic for a fixed CPU.

/// `out (n×m) = x (n×k) · wᵀ`, with `w` stored as `m×k`.
pub fn matmul_t(x: &[f64], w: &[f64], n: usize, k: usize, m: usize, out: &mut [f64]) {
    debug_assert_eq!(x.len(), n * k);
    debug_assert_eq!(w.len(), m * k);
    debug_assert_eq!(out.len(), n * m);
    // SAFETY: slice lengths are checked above and the strides describe
    // in-bounds row-major (x, out) and transposed (w) views.
    unsafe {
        matrixmultiply::dgemm(
            n,
            k,
            m,
            1.0,
            x.as_ptr(),
            k as isize,
            1,
            w.as_ptr(),
            1,
            k as isize,
            0.0,
            out.as_mut_ptr(),
            m as isize,
            1,
        );
    }
}

/// `out (n×k) = a (n×m) · b (m×k)`.
pub fn matmul(a: &[f64], b: &[f64], n: usize, m: usize, k: usize, out: &mut [f64]) {
    debug_assert_eq!(a.len(), n * m);
    debug_assert_eq!(b.len(), m * k);
    debug_assert_eq!(out.len(), n * k);
    // SAFETY: lengths checked above; plain row-major strides.
    unsafe {
        matrixmultiply::dgemm(
            n,
            m,
            k,
            1.0,
            a.as_ptr(),
            m as isize,
            1,
            b.as_ptr(),
            k as isize,
            1,
            0.0,
            out.as_mut_ptr(),
            k as isize,
            1,
        );
    }
}

/// `out (m×k) = aᵀ · b`, with `a: n×m` and `b: n×k`.
pub fn matmul_tn(a: &[f64], b: &[f64], n: usize, m: usize, k: usize, out: &mut [f64]) {
    debug_assert_eq!(a.len(), n * m);
    debug_assert_eq!(b.len(), n * k);
    debug_assert_eq!(out.len(), m * k);
    // SAFETY: lengths checked above; `a` is read through transposed strides.
    unsafe {
        matrixmultiply::dgemm(
            m,
            n,
            k,
            1.0,
            a.as_ptr(),
            1,
            m as isize,
            b.as_ptr(),
            k as isize,
            1,
            0.0,
            out.as_mut_ptr(),
            k as isize,
            1,
        );
    }
}

pub fn add_row(out: &mut [f64], row: &[f64]) {
    for r in out.chunks_mut(row.len()) {
        for (o, b) in r.iter_mut().zip(row) {
            *o += b;
        }
    }
}

pub fn log_softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_z = row.iter().map(|v| (v - max).exp()).sum::<f64>().ln() + max;
    for v in row.iter_mut() {
        *v -= log_z;
    }
}
