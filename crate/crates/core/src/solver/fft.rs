//! Square 2D FFTs and cached kernel spectra for grid convolutions.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::kernels::{unit_beurling, unit_cauchy};

/// Row/column FFT of an `n x n` row-major buffer.
///
/// `forward` leaves the spectrum transposed (`s[kx][ky]`); `inverse` expects
/// that layout and restores the original one, so convolutions never pay for
/// the two extra transposes.
pub(crate) struct Fft2 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft2 {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub fn cached(n: usize) -> Arc<Fft2> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Fft2>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        cache
            .lock()
            .expect("fft cache poisoned")
            .entry(n)
            .or_insert_with(|| Arc::new(Fft2::new(n)))
            .clone()
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n * self.n);
        self.fwd.process(buf);
        transpose(buf, self.n);
        self.fwd.process(buf);
    }

    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.inv.process(buf);
        transpose(buf, self.n);
        self.inv.process(buf);
        let scale = 1.0 / (self.n * self.n) as f64;
        for v in buf.iter_mut() {
            *v *= scale;
        }
    }
}

fn transpose(buf: &mut [Complex64], n: usize) {
    const B: usize = 32;
    for bi in (0..n).step_by(B) {
        for bj in (bi..n).step_by(B) {
            for i in bi..(bi + B).min(n) {
                let start = if bi == bj { i + 1 } else { bj };
                for j in start..(bj + B).min(n) {
                    buf.swap(i * n + j, j * n + i);
                }
            }
        }
    }
}

/// Signed frequency / offset for index `i` of a length-`m` periodic axis.
pub(crate) fn signed_index(i: usize, m: usize) -> i64 {
    if i < m / 2 {
        i as i64
    } else {
        i as i64 - m as i64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum KernelKind {
    Cauchy,
    Beurling,
}

fn kernel_spectrum(kind: KernelKind, m: usize) -> Arc<Vec<Complex64>> {
    type Key = (KernelKind, usize);
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<Vec<Complex64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(s) = cache.lock().expect("kernel cache poisoned").get(&(kind, m)) {
        return s.clone();
    }
    let mut buf = Vec::with_capacity(m * m);
    for row in 0..m {
        let dy = signed_index(row, m);
        for col in 0..m {
            let dx = signed_index(col, m);
            buf.push(match kind {
                KernelKind::Cauchy => unit_cauchy(dx, dy),
                KernelKind::Beurling => unit_beurling(dx, dy),
            });
        }
    }
    Fft2::cached(m).forward(&mut buf);
    let spectrum = Arc::new(buf);
    cache
        .lock()
        .expect("kernel cache poisoned")
        .insert((kind, m), spectrum.clone());
    spectrum
}

/// Discrete convolution of an `n x n` grid with a cell-averaged kernel.
///
/// `padded` selects a `2n` linear convolution valid at every node; otherwise
/// the convolution is periodic of size `n` and exact only where all source
/// nodes lie within `n/2` nodes in each axis.
pub(crate) struct Convolver {
    n: usize,
    padded: bool,
    fft: Arc<Fft2>,
    spectrum: Arc<Vec<Complex64>>,
    scale: f64,
}

impl Convolver {
    pub fn new(kind: KernelKind, n: usize, spacing: f64, padded: bool) -> Self {
        let m = if padded { 2 * n } else { n };
        let scale = match kind {
            KernelKind::Cauchy => spacing,
            KernelKind::Beurling => 1.0,
        };
        Convolver {
            n,
            padded,
            fft: Fft2::cached(m),
            spectrum: kernel_spectrum(kind, m),
            scale,
        }
    }

    pub fn apply(&self, h: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        if !self.padded {
            let mut buf = h.to_vec();
            self.fft.forward(&mut buf);
            for (b, s) in buf.iter_mut().zip(self.spectrum.iter()) {
                *b *= s * self.scale;
            }
            self.fft.inverse(&mut buf);
            return buf;
        }
        let m = 2 * n;
        let mut buf = vec![Complex64::new(0.0, 0.0); m * m];
        for row in 0..n {
            buf[row * m..row * m + n].copy_from_slice(&h[row * n..row * n + n]);
        }
        self.fft.forward(&mut buf);
        for (b, s) in buf.iter_mut().zip(self.spectrum.iter()) {
            *b *= s * self.scale;
        }
        self.fft.inverse(&mut buf);
        let mut out = Vec::with_capacity(n * n);
        for row in 0..n {
            out.extend_from_slice(&buf[row * m..row * m + n]);
        }
        out
    }
}
