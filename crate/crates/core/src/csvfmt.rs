//! Number formatting shared by every CSV writer.

/// 17 significant digits, so values round-trip exactly.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}
