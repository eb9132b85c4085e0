use crate::error::{Error, Result};

/// Distance at which the sign autocorrelation of a 2-D slice first drops to
/// zero, in units of `spacing`. `values` is `nx * ny`, x fastest. Cells
/// holding exactly zero are excluded, so only the occupied region counts.
/// Returns the largest lag examined when the correlation never crosses zero.
pub fn sign_correlation_length(values: &[f64], nx: usize, ny: usize, spacing: f64) -> Result<f64> {
    if values.len() != nx * ny || nx < 2 || ny < 2 {
        return Err(Error::Contract(format!("slice of {} values is not {nx} x {ny}", values.len())));
    }
    let sign: Vec<f64> = values.iter().map(|&v| if v == 0.0 { 0.0 } else { v.signum() }).collect();
    let max_lag = nx.max(ny) - 1;
    let corr = |d: usize| {
        let (mut sum, mut count) = (0.0, 0usize);
        for y in 0..ny {
            for x in 0..nx {
                let s = sign[x + nx * y];
                if s == 0.0 {
                    continue;
                }
                for (xx, yy) in [(x + d, y), (x, y + d)] {
                    if xx < nx && yy < ny {
                        let t = sign[xx + nx * yy];
                        if t != 0.0 {
                            sum += s * t;
                            count += 1;
                        }
                    }
                }
            }
        }
        (count > 0).then(|| sum / count as f64)
    };
    let mut prev = corr(0).ok_or_else(|| Error::Contract("slice has no non-zero cells".into()))?;
    for d in 1..=max_lag {
        let Some(c) = corr(d) else {
            return Ok((d - 1) as f64 * spacing);
        };
        if c <= 0.0 {
            return Ok((d as f64 - 1.0 + prev / (prev - c)) * spacing);
        }
        prev = c;
    }
    Ok(max_lag as f64 * spacing)
}
