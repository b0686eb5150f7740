//! Scalar abstraction: the numeric kernels are generic over a floating-point
//! type implementing [`Real`]. `f64` is the default used by the crate-root
//! aliases; `f32` is supported for the pure-math kernels.

use std::fmt;
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FloatConst, FromPrimitive};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum<Self>
    + fmt::Display
    + fmt::Debug
    + fmt::LowerExp
    + Send
    + Sync
    + 'static
{
    /// Name recorded in run metadata.
    const NAME: &'static str;

    /// Lossy conversion from an `f64` constant.
    fn of(v: f64) -> Self;

    /// Widening (or rounding, for `f32`) conversion to `f64`.
    fn as_f64(self) -> f64;

    /// One standard normal draw.
    fn std_normal<G: Rng + ?Sized>(rng: &mut G) -> Self;

    /// One uniform draw in `[0, 1)`.
    fn unit_uniform<G: Rng + ?Sized>(rng: &mut G) -> Self;

    /// One uniform draw in `[lo, hi)`.
    fn uniform<G: Rng + ?Sized>(rng: &mut G, lo: Self, hi: Self) -> Self {
        lo + (hi - lo) * Self::unit_uniform(rng)
    }
}

macro_rules! impl_real {
    ($t:ty, $name:literal) => {
        impl Real for $t {
            const NAME: &'static str = $name;

            #[inline]
            fn of(v: f64) -> Self {
                v as $t
            }

            #[inline]
            fn as_f64(self) -> f64 {
                self as f64
            }

            #[inline]
            fn std_normal<G: Rng + ?Sized>(rng: &mut G) -> Self {
                StandardNormal.sample(rng)
            }

            #[inline]
            fn unit_uniform<G: Rng + ?Sized>(rng: &mut G) -> Self {
                rng.gen::<$t>()
            }
        }
    };
}

impl_real!(f64, "f64");
impl_real!(f32, "f32");
