use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Planned forward/inverse transform pair of fixed length.
///
/// Forward is unnormalized; inverse is scaled by `1/n` so that a round trip is the identity.
#[derive(Clone)]
pub struct FourierTransform {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    scale: f64,
}

impl FourierTransform {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            forward,
            inverse,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
            scale: 1.0 / n as f64,
        }
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn forward(&mut self, data: &mut [Complex64]) {
        self.forward.process_with_scratch(data, &mut self.scratch);
    }

    pub fn inverse(&mut self, data: &mut [Complex64]) {
        self.inverse.process_with_scratch(data, &mut self.scratch);
        for z in data.iter_mut() {
            *z *= self.scale;
        }
    }
}

impl fmt::Debug for FourierTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FourierTransform")
            .field("len", &self.len())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn round_trip_is_identity(
            values in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 64)
        ) {
            let original: Vec<Complex64> =
                values.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
            let mut data = original.clone();
            let mut ft = FourierTransform::new(data.len());
            ft.forward(&mut data);
            ft.inverse(&mut data);
            let scale = original.iter().map(|z| z.norm()).fold(1.0, f64::max);
            for (a, b) in original.iter().zip(&data) {
                prop_assert!((a - b).norm() <= 1e-13 * scale);
            }
        }
    }
}
