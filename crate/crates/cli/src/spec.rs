//! Parsers for command-line value syntaxes.

use rupture_core::density::geometric_ladder;

use crate::error::CliError;

/// `x1,x2,…` as a point.
pub fn parse_point(s: &str) -> Result<Vec<f64>, CliError> {
    let coords = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| CliError::config(format!("point {s:?}: {e}"))))
        .collect::<Result<Vec<f64>, _>>()?;
    if coords.iter().any(|c| !c.is_finite()) {
        return Err(CliError::config(format!("point {s:?} has a non-finite coordinate")));
    }
    Ok(coords)
}

/// `min:max:count` as a geometric ladder, ascending.
pub fn parse_radii(s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, count] = parts.as_slice() else {
        return Err(CliError::config(format!("radii {s:?}: expected min:max:count")));
    };
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| CliError::config(format!("radii {s:?}: {e}")));
    let count = count.trim().parse::<usize>().map_err(|e| CliError::config(format!("radii {s:?}: {e}")))?;
    if count > 1 << 16 {
        return Err(CliError::config(format!("radii {s:?}: too many radii")));
    }
    Ok(geometric_ladder(num(lo)?, num(hi)?, count)?)
}

/// Comma-separated criterion numbers, e.g. `1,4,15`.
pub fn parse_ids(s: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| CliError::config(format!("criterion list {s:?}: {e}"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_and_ladders() {
        assert_eq!(parse_point("0,-1.5").unwrap(), vec![0.0, -1.5]);
        assert!(parse_point("0,x").is_err());
        assert!(parse_point("nan").is_err());
        let r = parse_radii("0.05:0.3:16").unwrap();
        assert_eq!(r.len(), 16);
        assert!((r[0] - 0.05).abs() < 1e-15 && (r[15] - 0.3).abs() < 1e-15);
        assert!(parse_radii("0.3:0.05:4").is_err());
        assert!(parse_radii("1:2").is_err());
    }
}
