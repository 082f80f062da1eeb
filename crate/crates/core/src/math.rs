// SPDX-License-Identifier: Apache-2.0

//! Elementary functions: the platform implementations with `std`, `libm`
//! otherwise.

macro_rules! unary {
    ($($name:ident),*) => {
        $(
            #[cfg(feature = "std")]
            #[inline(always)]
            pub fn $name(x: f64) -> f64 {
                f64::$name(x)
            }

            #[cfg(not(feature = "std"))]
            #[inline(always)]
            pub fn $name(x: f64) -> f64 {
                libm::$name(x)
            }
        )*
    };
}

unary!(exp, sqrt, tanh, cos, sin, atan, ceil, round);

#[cfg(feature = "std")]
#[inline(always)]
pub fn log(x: f64) -> f64 {
    x.ln()
}

#[cfg(not(feature = "std"))]
#[inline(always)]
pub fn log(x: f64) -> f64 {
    libm::log(x)
}

#[cfg(feature = "std")]
#[inline(always)]
pub fn pow(x: f64, y: f64) -> f64 {
    x.powf(y)
}

#[cfg(not(feature = "std"))]
#[inline(always)]
pub fn pow(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline(always)]
pub fn fabs(x: f64) -> f64 {
    if x < 0.0 {
        -x
    } else {
        x
    }
}
