//! Value grids given on the command line.
//!
//! `start:stop:step` expands to `start + i * step` for every `i` with
//! `start + i * step < stop + step / 2`, so `0:1:0.25` includes `1` but
//! rounding in `step` never adds a spurious extra point. A comma list
//! (`0.1,0.2,0.4`) or a single number is taken literally.

use crate::error::{LabError, LabResult};

pub const MAX_GRID_POINTS: usize = 10_000_000;

fn number(s: &str, what: &str) -> LabResult<f64> {
    let x: f64 = s
        .trim()
        .parse()
        .map_err(|_| LabError::Usage(format!("malformed number `{s}` in {what}")))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(LabError::Usage(format!("non-finite value `{s}` in {what}")))
    }
}

pub fn parse_grid(s: &str) -> LabResult<Vec<f64>> {
    let s = s.trim();
    if s.is_empty() {
        return Err(LabError::Usage("empty grid".into()));
    }
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, c] = parts[..] else {
            return Err(LabError::Usage(format!(
                "grid `{s}` must be start:stop:step"
            )));
        };
        let (start, stop, step) = (number(a, s)?, number(b, s)?, number(c, s)?);
        if !(step > 0.0) {
            return Err(LabError::Usage(format!("grid `{s}` needs a positive step")));
        }
        if stop < start {
            return Err(LabError::Usage(format!("grid `{s}` has stop below start")));
        }
        let count = ((stop - start) / step + 0.5).ceil();
        if count > MAX_GRID_POINTS as f64 {
            return Err(LabError::Usage(format!(
                "grid `{s}` has more than {MAX_GRID_POINTS} points"
            )));
        }
        let limit = stop + 0.5 * step;
        Ok((0..=count as usize)
            .map(|i| start + i as f64 * step)
            .filter(|&x| x < limit)
            .collect())
    } else {
        s.split(',').map(|p| number(p, s)).collect()
    }
}

/// Comma-separated positive integers, such as a list of dimensions.
pub fn parse_usize_list(s: &str) -> LabResult<Vec<usize>> {
    let v: Vec<usize> = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .ok()
                .filter(|&x| x > 0)
                .ok_or_else(|| LabError::Usage(format!("`{p}` in `{s}` is not a positive integer")))
        })
        .collect::<LabResult<_>>()?;
    Ok(v)
}
