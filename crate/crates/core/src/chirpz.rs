//! Chirp-z transform through Bluestein's FFT convolution.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Evaluates `X_n = sum_k x_k exp(-i (k * (theta0 + n * dtheta)))` for
/// `n = 0..outputs`.
///
/// This is the DFT of `x` on an arbitrary uniform set of angles, computed in
/// O((K + M) log(K + M)) with no interpolation.
pub fn chirp_z(x: &[Complex64], theta0: f64, dtheta: f64, outputs: usize) -> Vec<Complex64> {
    let k_len = x.len();
    if k_len == 0 || outputs == 0 {
        return vec![Complex64::new(0.0, 0.0); outputs];
    }
    // W^{q^2/2} with W = e^{-i dtheta}; q^2 stays exact in f64 for our sizes.
    let chirp = |q: i64| Complex64::from_polar(1.0, -0.5 * dtheta * (q * q) as f64);

    let len = (k_len + outputs - 1).next_power_of_two();
    let mut a = vec![Complex64::new(0.0, 0.0); len];
    for (k, xk) in x.iter().enumerate() {
        let rotate = Complex64::from_polar(1.0, -(k as f64) * theta0);
        a[k] = xk * rotate * chirp(k as i64);
    }
    // b_m = W^{-m^2/2} for m = -(K-1)..(M-1), stored circularly.
    let mut b = vec![Complex64::new(0.0, 0.0); len];
    for m in 0..outputs {
        b[m] = chirp(m as i64).conj();
    }
    for m in 1..k_len {
        b[len - m] = chirp(m as i64).conj();
    }

    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(len);
    let inverse = planner.plan_fft_inverse(len);
    forward.process(&mut a);
    forward.process(&mut b);
    for (ai, bi) in a.iter_mut().zip(&b) {
        *ai *= bi;
    }
    inverse.process(&mut a);
    let norm = 1.0 / len as f64;
    (0..outputs)
        .map(|n| a[n] * norm * chirp(n as i64))
        .collect()
}
