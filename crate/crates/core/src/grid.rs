//! Logarithmic index grids shared by the density and oscillation scans.

/// Indices `round(2^(i/per_octave))` in `[lo, hi]`, strictly increasing.
pub(crate) fn log_grid(lo: u64, hi: u64, per_octave: u32) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::new();
    if hi < lo {
        return out;
    }
    let mut i = 0u32;
    loop {
        let v = (f64::from(i) / f64::from(per_octave)).exp2().round();
        if v > hi as f64 {
            break;
        }
        let v = v as u64;
        if v >= lo && out.last().is_none_or(|&last| v > last) {
            out.push(v);
        }
        i += 1;
    }
    out
}
