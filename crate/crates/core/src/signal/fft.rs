use super::SignalError;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Radix-2 FFT. The inverse transform is scaled by `1/N`.
pub fn fft(input: &[Complex64], inverse: bool) -> Result<Vec<Complex64>, SignalError> {
    let mut buf = input.to_vec();
    fft_in_place(&mut buf, inverse)?;
    Ok(buf)
}

/// Iterative in-place radix-2 FFT (bit-reversal permutation, then
/// Cooley-Tukey butterflies).
pub fn fft_in_place(buf: &mut [Complex64], inverse: bool) -> Result<(), SignalError> {
    let n = buf.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(SignalError::NotPowerOfTwo(n));
    }
    let bits = n.trailing_zeros();
    if bits > 0 {
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                buf.swap(i, j);
            }
        }
    }
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        // twiddles computed directly per stage to avoid recurrence drift
        let twiddles: Vec<Complex64> = (0..half)
            .map(|k| Complex64::from_polar(1.0, sign * 2.0 * PI * k as f64 / len as f64))
            .collect();
        for block in buf.chunks_exact_mut(len) {
            let (lo, hi) = block.split_at_mut(half);
            for ((a, b), w) in lo.iter_mut().zip(hi.iter_mut()).zip(&twiddles) {
                let t = *b * w;
                *b = *a - t;
                *a += t;
            }
        }
        len *= 2;
    }
    if inverse {
        let scale = 1.0 / n as f64;
        buf.iter_mut().for_each(|x| *x *= scale);
    }
    Ok(())
}

/// Direct O(N²) DFT, used as a reference for [`fft`].
pub fn dft_naive(input: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let n = input.len();
    let sign = if inverse { 1.0 } else { -1.0 };
    let mut out: Vec<Complex64> = (0..n)
        .map(|k| {
            input
                .iter()
                .enumerate()
                .map(|(t, x)| {
                    // reduce k*t mod n first so the angle stays accurate
                    let phase = ((k * t) % n) as f64 / n as f64;
                    x * Complex64::from_polar(1.0, sign * 2.0 * PI * phase)
                })
                .sum()
        })
        .collect();
    if inverse {
        out.iter_mut().for_each(|x| *x /= n as f64);
    }
    out
}
