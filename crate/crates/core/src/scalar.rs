//! Floating-point scalar used by the grid modules.

use nalgebra::RealField;
use num_complex::Complex;

/// `f32` or `f64`.
pub trait Real: RealField + Copy + rustfft::FftNum + Send + Sync + 'static {
    fn of(x: f64) -> Self;
    fn to_f64(self) -> f64;
    /// Machine epsilon.
    fn eps() -> Self;

    fn cplx(re: f64, im: f64) -> Complex<Self> {
        Complex::new(Self::of(re), Self::of(im))
    }
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            #[inline]
            fn of(x: f64) -> Self {
                x as $t
            }
            #[inline]
            fn to_f64(self) -> f64 {
                self as f64
            }
            #[inline]
            fn eps() -> Self {
                <$t>::EPSILON
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);
