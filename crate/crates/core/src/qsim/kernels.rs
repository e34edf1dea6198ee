//! In-place kernels over flat amplitude buffers addressed by bit position.

use num_complex::Complex;

use crate::scalar::Real;

#[inline]
pub(crate) fn apply_1q<T: Real>(buf: &mut [Complex<T>], bit: usize, m: &[[Complex<T>; 2]; 2]) {
    let stride = 1usize << bit;
    let [[m00, m01], [m10, m11]] = *m;
    let mut base = 0;
    while base < buf.len() {
        for i in base..base + stride {
            let a = buf[i];
            let b = buf[i + stride];
            buf[i] = m00 * a + m01 * b;
            buf[i + stride] = m10 * a + m11 * b;
        }
        base += stride << 1;
    }
}

#[inline]
pub(crate) fn apply_cx<T: Real>(buf: &mut [Complex<T>], control_bit: usize, target_bit: usize) {
    let cmask = 1usize << control_bit;
    let tmask = 1usize << target_bit;
    for i in 0..buf.len() {
        if i & cmask != 0 && i & tmask == 0 {
            buf.swap(i, i | tmask);
        }
    }
}

pub(crate) fn conj_matrix<T: Real>(m: &[[Complex<T>; 2]; 2]) -> [[Complex<T>; 2]; 2] {
    [[m[0][0].conj(), m[0][1].conj()], [m[1][0].conj(), m[1][1].conj()]]
}
