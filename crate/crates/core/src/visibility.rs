use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VisibilityMethod {
    Analytic,
    Numeric,
}

/// A fringe visibility together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibilityResult<T> {
    pub visibility: T,
    /// Phase α that maximizes the contrast, for two-dimensional scans.
    pub best_alpha: Option<T>,
    pub method: VisibilityMethod,
}

impl<T: Scalar> VisibilityResult<T> {
    pub fn analytic(visibility: T) -> Self {
        Self {
            visibility,
            best_alpha: None,
            method: VisibilityMethod::Analytic,
        }
    }

    pub fn numeric(visibility: T) -> Self {
        Self {
            visibility,
            best_alpha: None,
            method: VisibilityMethod::Numeric,
        }
    }
}
