//! `--axis name=start:step:stop` (stop included when hit exactly),
//! `name=v1,v2,...` or `name=v`.

use vrsomp_core::harness::AxisKind;
use vrsomp_core::{Error, Result};

pub fn parse_axis(spec: &str) -> Result<(AxisKind, Vec<f64>)> {
    let bad = |msg: String| Error::config("axis", msg);
    let (name, range) = spec
        .split_once('=')
        .ok_or_else(|| bad(format!("expected NAME=VALUES, got `{spec}`")))?;
    let axis: AxisKind = name.trim().parse()?;
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| bad(format!("`{s}` is not a number")))
    };

    let values = if range.contains(':') {
        let parts: Vec<&str> = range.split(':').collect();
        if parts.len() != 3 {
            return Err(bad(format!("expected start:step:stop, got `{range}`")));
        }
        let (start, step, stop) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step.is_finite() && step != 0.0) || (stop - start) * step < 0.0 {
            return Err(bad(format!("step {step} does not walk from {start} to {stop}")));
        }
        let span = (stop - start) / step;
        let count = (span + 1e-9).floor() as usize + 1;
        (0..count).map(|i| start + i as f64 * step).collect()
    } else {
        range.split(',').map(num).collect::<Result<Vec<f64>>>()?
    };
    if values.is_empty() {
        return Err(bad("no axis values".into()));
    }
    Ok((axis, values))
}
