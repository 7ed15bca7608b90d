use crate::CliError;

/// Blocklength grid from `"20,50,100"` (strictly increasing) or
/// `"logspace:MIN:MAX:POINTS"` (geometric spacing, rounded to integers,
/// duplicates dropped).
pub fn parse_n_grid(spec: &str) -> Result<Vec<u64>, CliError> {
    let bad = |why: String| CliError::Usage(format!("bad n grid {spec:?}: {why}"));
    let int = |s: &str| s.trim().parse::<u64>().map_err(|e| bad(format!("{s:?}: {e}")));
    if let Some(rest) = spec.strip_prefix("logspace:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let [lo, hi, points] = parts[..] else {
            return Err(bad("expected logspace:MIN:MAX:POINTS".into()));
        };
        let (lo, hi, points) = (int(lo)?, int(hi)?, int(points)?);
        if lo == 0 || hi < lo || points == 0 {
            return Err(bad("need 1 <= MIN <= MAX and POINTS >= 1".into()));
        }
        if points == 1 {
            return Ok(vec![lo]);
        }
        let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
        let mut out: Vec<u64> = (0..points)
            .map(|i| {
                let v = (a + (b - a) * i as f64 / (points - 1) as f64).exp().round() as u64;
                v.clamp(lo, hi)
            })
            .collect();
        out.dedup();
        return Ok(out);
    }
    let out = spec.split(',').map(int).collect::<Result<Vec<_>, _>>()?;
    if out.contains(&0) {
        return Err(bad("blocklengths must be at least 1".into()));
    }
    if out.windows(2).any(|w| w[0] >= w[1]) {
        return Err(bad("blocklengths must be strictly increasing".into()));
    }
    Ok(out)
}
