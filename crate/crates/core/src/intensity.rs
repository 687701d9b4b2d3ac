//! Normalized strength formulas. Every formula maps the identity
//! parameterization to 0, saturates at 100 and is monotone in the magnitude
//! of its argument.

/// `min(|value|, cap) / cap * 100`
pub fn saturating(value: f64, cap: f64) -> f64 {
    value.abs().min(cap) / cap * 100.0
}

/// Multiplicative factors where 1 is identity: `min(|f - 1|, 1) * 100`.
pub fn factor(f: f64) -> f64 {
    saturating(f - 1.0, 1.0)
}

/// Rates and speed factors: `min(|log2 f|, 2) / 2 * 100`.
pub fn log2_factor(f: f64) -> f64 {
    if f <= 0.0 {
        return 100.0;
    }
    saturating(f.log2(), 2.0)
}

/// A fraction of units changed, covered or removed: `clamp(x, 0, 1) * 100`.
pub fn fraction(x: f64) -> f64 {
    x.clamp(0.0, 1.0) * 100.0
}
