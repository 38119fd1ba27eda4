//! Shared numeric output formatting.

/// Formats an `f64` with 17 significant digits in scientific notation.
///
/// 17 digits guarantee a bit-exact parse round-trip, and the output is
/// locale-independent, so repeated runs of the same configuration produce
/// byte-identical files.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}
