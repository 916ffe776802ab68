//! Thin wrappers over `libm` so the crate builds without `std` and produces
//! bit-identical floats everywhere.

pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}


pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

pub(crate) fn cos(x: f64) -> f64 {
    libm::cos(x)
}

pub(crate) fn sin(x: f64) -> f64 {
    libm::sin(x)
}

pub(crate) fn abs(x: f64) -> f64 {
    libm::fabs(x)
}


pub(crate) fn log2(x: f64) -> f64 {
    libm::log2(x)
}

pub(crate) fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}
