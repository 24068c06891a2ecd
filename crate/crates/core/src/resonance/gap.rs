use super::{ResonanceError, SineCombination};

/// An empty window `[h^{1-alpha+mu}, h^{1-alpha-mu}]` in the sine values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapResult {
    /// Gap exponent, in `[delta/2, delta]`.
    pub alpha: f64,
    pub mu: f64,
    pub delta: f64,
    pub n: u32,
    /// Index `i` of the chosen candidate `alpha_i = delta/2 + (2i+1) mu`.
    pub index: usize,
    /// Number of candidate values `M` used to size `mu`.
    pub candidates: usize,
    /// `h^{1-alpha+mu}`: values at or below this are near-resonant.
    pub lower: f64,
    /// `h^{1-alpha-mu}`
    pub upper: f64,
}

impl GapResult {
    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }
}

fn window(h: f64, delta: f64, mu: f64, i: usize) -> (f64, f64, f64) {
    let alpha = 0.5 * delta + (2 * i + 1) as f64 * mu;
    (alpha, h.powf(1.0 - alpha + mu), h.powf(1.0 - alpha - mu))
}

/// Finds an empty window by pigeonhole over `M + 1` adjacent exponent
/// windows `alpha_i = delta/2 + (2i+1) mu`, `mu = delta / (4(M+1))`, and
/// returns the one with the largest `alpha`.
///
/// `M` is `max(ell^{N+1}, combinations.len())` so that the number of
/// windows always exceeds the number of values.
pub fn detect_gap(
    combinations: &[SineCombination],
    h: f64,
    delta: f64,
    n: u32,
    ell: usize,
) -> Result<GapResult, ResonanceError> {
    if !(h > 0.0 && h < 1.0) {
        return Err(ResonanceError::GapNotFound(format!("step size h = {h} must lie in (0, 1)")));
    }
    if !(delta > 0.0 && delta <= 0.25) {
        return Err(ResonanceError::InvalidInput(format!("delta = {delta} must lie in (0, 1/4]")));
    }
    let pow_count = (ell as f64).powi(n as i32 + 1);
    let m = (pow_count.min(1e12) as usize).max(combinations.len());
    let mu = delta / (4.0 * (m + 1) as f64);

    // exponent e = ln v / ln h lies in window i iff
    // 1 - delta/2 - (2i+2) mu <= e <= 1 - delta/2 - 2i mu
    let top = 1.0 - 0.5 * delta;
    let ln_h = h.ln();
    let mut occupied: Vec<usize> = Vec::new();
    for c in combinations {
        if !(c.value > 0.0) {
            continue;
        }
        let e = c.value.ln() / ln_h;
        let x = (top - e) / (2.0 * mu);
        if x < -1.0 || x > (m + 1) as f64 {
            continue;
        }
        let i = x.floor() as i64;
        // neighbours too, exact membership is re-checked below
        for j in (i - 1)..=(i + 1) {
            if (0..=m as i64).contains(&j) {
                occupied.push(j as usize);
            }
        }
    }
    occupied.sort_unstable();
    occupied.dedup();

    for i in (0..=m).rev() {
        let (alpha, lower, upper) = window(h, delta, mu, i);
        let marked = occupied.binary_search(&i).is_ok();
        if marked && combinations.iter().any(|c| lower <= c.value && c.value <= upper) {
            continue;
        }
        return Ok(GapResult { alpha, mu, delta, n, index: i, candidates: m, lower, upper });
    }
    Err(ResonanceError::GapNotFound(format!("all {} candidate windows are occupied", m + 1)))
}

/// Combinations with `|sin(h/2 k.w)| <= h^{1-alpha+mu}`.
pub fn near_resonant_set(combinations: &[SineCombination], gap: &GapResult) -> Vec<Vec<i64>> {
    combinations.iter().filter(|c| c.value <= gap.lower).map(|c| c.k.clone()).collect()
}
