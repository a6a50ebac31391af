//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};

use num_complex::Complex;
use num_traits::{Float, FromPrimitive, NumAssign};

/// Real floating-point type the workbench is generic over (`f32` or `f64`).
pub trait Real:
    Float + FromPrimitive + NumAssign + Default + Debug + Display + LowerExp + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal representable in target float type")
}

/// Builds a complex number from `f64` parts.
#[inline]
pub fn cplx<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(lit(re), lit(im))
}

#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Principal square root, with the branch cut on the negative real axis.
#[inline]
pub fn principal_sqrt<T: Real>(z: Complex<T>) -> Complex<T> {
    z.sqrt()
}

/// Relative distance `|a - b| / max(|a|, |b|, floor)`.
pub fn relative_error<T: Real>(a: Complex<T>, b: Complex<T>, floor: T) -> T {
    let scale = a.norm().max(b.norm()).max(floor);
    (a - b).norm() / scale
}

/// Euclidean norm of a complex vector.
pub fn vec_norm<T: Real>(v: &[Complex<T>]) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}

/// Derivative of `prod_k vals[k]` when each factor has derivative `ders[k]`,
/// evaluated with prefix/suffix products so zero factors are handled exactly.
pub fn product_derivative<T: Real>(vals: &[Complex<T>], ders: &[Complex<T>]) -> Complex<T> {
    debug_assert_eq!(vals.len(), ders.len());
    let n = vals.len();
    let mut suffix = vec![Complex::new(T::one(), T::zero()); n + 1];
    for k in (0..n).rev() {
        suffix[k] = suffix[k + 1] * vals[k];
    }
    let mut prefix = Complex::new(T::one(), T::zero());
    let mut out = Complex::new(T::zero(), T::zero());
    for k in 0..n {
        out += prefix * ders[k] * suffix[k + 1];
        prefix *= vals[k];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_derivative_matches_expansion() {
        let vals = [cplx::<f64>(1.0, 2.0), cplx(0.0, 0.0), cplx(3.0, -1.0)];
        let ders = [cplx::<f64>(0.5, 0.0), cplx(2.0, 1.0), cplx(-1.0, 0.0)];
        // only the term differentiating the zero factor survives
        let expected = vals[0] * ders[1] * vals[2];
        assert!((product_derivative(&vals, &ders) - expected).norm() < 1e-14);
    }

    #[test]
    fn relative_error_uses_floor() {
        let z = cplx::<f64>(0.0, 0.0);
        assert_eq!(relative_error(z, z, 1e-30), 0.0);
    }
}
