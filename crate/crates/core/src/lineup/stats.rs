//! Response adjustment and shot-efficiency stats.

use crate::{Error, Result};

/// Shrink a lineup's offensive rating toward its team's rating in
/// proportion to minutes below the horizon; at or above the horizon the raw
/// lineup rating is used unchanged.
pub fn adjust_offrtg(
    lineup_offrtg: f64,
    minutes: f64,
    team_offrtg: f64,
    horizon: f64,
) -> Result<f64> {
    if !(minutes > 0.0) {
        return Err(Error::Lineup(format!("minutes must be positive, got {minutes}")));
    }
    if minutes >= horizon {
        return Ok(lineup_offrtg);
    }
    let w = minutes / horizon;
    Ok(lineup_offrtg * w + team_offrtg * (1.0 - w))
}

/// True shooting percentage: PTS / (2 (FGA + 0.44 FTA)) * 100.
pub fn true_shooting_pct(pts: f64, fga: f64, fta: f64) -> Result<f64> {
    let denom = fga + 0.44 * fta;
    if denom <= 0.0 {
        return Err(Error::UndefinedStat(format!(
            "TS%% needs FGA + 0.44 FTA > 0, got {denom}"
        )));
    }
    Ok(pts / (2.0 * denom) * 100.0)
}

/// Points per possession: PTS / (FGA + 0.44 FTA + TO).
pub fn points_per_possession(pts: f64, fga: f64, fta: f64, to: f64) -> Result<f64> {
    let denom = fga + 0.44 * fta + to;
    if denom <= 0.0 {
        return Err(Error::UndefinedStat(format!(
            "PPP needs FGA + 0.44 FTA + TO > 0, got {denom}"
        )));
    }
    Ok(pts / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjustment_weights() {
        // at the horizon the lineup value passes through
        assert_eq!(adjust_offrtg(110.0, 300.0, 100.0, 300.0).unwrap(), 110.0);
        // midpoint
        assert_eq!(adjust_offrtg(110.0, 150.0, 100.0, 300.0).unwrap(), 105.0);
        // 50 minutes: 120/6 + 105*5/6
        let v = adjust_offrtg(120.0, 50.0, 105.0, 300.0).unwrap();
        assert!((v - 107.5).abs() < 1e-12);
        assert!(adjust_offrtg(110.0, -1.0, 100.0, 300.0).is_err());
    }

    #[test]
    fn adjustment_continuous_at_horizon() {
        let below = adjust_offrtg(112.0, 300.0 - 1e-9, 100.0, 300.0).unwrap();
        let at = adjust_offrtg(112.0, 300.0, 100.0, 300.0).unwrap();
        assert!((below - at).abs() < 1e-9);
    }

    #[test]
    fn ts_pct_cases() {
        assert_eq!(true_shooting_pct(0.0, 10.0, 0.0).unwrap(), 0.0);
        assert_eq!(true_shooting_pct(100.0, 50.0, 0.0).unwrap(), 100.0);
        let v = true_shooting_pct(30.0, 20.0, 10.0).unwrap();
        assert!((v - 30.0 / (2.0 * 24.4) * 100.0).abs() < 1e-12);
        assert!((v - 61.47540983606558).abs() < 1e-10);
        assert!(true_shooting_pct(10.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn ppp_cases() {
        assert_eq!(points_per_possession(0.0, 10.0, 0.0, 0.0).unwrap(), 0.0);
        assert_eq!(points_per_possession(50.0, 40.0, 0.0, 10.0).unwrap(), 1.0);
        // adding turnovers strictly decreases PPP for pts > 0
        let base = points_per_possession(50.0, 40.0, 10.0, 0.0).unwrap();
        let more_to = points_per_possession(50.0, 40.0, 10.0, 5.0).unwrap();
        assert!(more_to < base);
        assert!(points_per_possession(10.0, 0.0, 0.0, 0.0).is_err());
    }
}
