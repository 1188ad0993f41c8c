//! Main-beam and side-lobe summary of a swept pattern.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lobe {
    pub theta_deg: f64,
    pub db_rel_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternSummary {
    pub argmax_deg: f64,
    pub peak_flux: f64,
    /// Local maxima outside the main-beam window, above the threshold.
    pub lobes: Vec<Lobe>,
    pub window_deg: [f64; 2],
    pub threshold_db: f64,
}

/// Local maxima are points not below either neighbour; an endpoint counts
/// when it exceeds its only neighbour.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    let n = values.len();
    match n {
        0 => vec![],
        1 => vec![0],
        _ => (0..n)
            .filter(|&i| {
                let left = i == 0 || values[i] >= values[i - 1];
                let right = i + 1 == n || values[i] >= values[i + 1];
                let edge_strict = (i > 0 || values[0] > values[1]) && (i + 1 < n || values[n - 1] > values[n - 2]);
                left && right && edge_strict && values[i] > 0.0
            })
            .collect(),
    }
}

pub fn summarize(theta_rad: &[f64], flux: &[f64], window_deg: [f64; 2], threshold_db: f64) -> PatternSummary {
    let (imax, peak) = flux.iter().enumerate().fold((0, f64::NEG_INFINITY), |a, (i, &v)| if v > a.1 { (i, v) } else { a });
    let lobes = local_maxima(flux)
        .into_iter()
        .filter_map(|i| {
            let d = theta_rad[i].to_degrees();
            let db = 10.0 * (flux[i] / peak).log10();
            (!(window_deg[0]..=window_deg[1]).contains(&d) && db > threshold_db).then_some(Lobe { theta_deg: d, db_rel_max: db })
        })
        .collect();
    PatternSummary {
        argmax_deg: theta_rad.get(imax).map_or(f64::NAN, |t| t.to_degrees()),
        peak_flux: peak,
        lobes,
        window_deg,
        threshold_db,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maxima_and_lobes() {
        let v = [1.0, 3.0, 2.0, 2.0, 5.0, 0.1, 0.2];
        assert_eq!(local_maxima(&v), vec![1, 4, 6]);
        let th: Vec<f64> = (0..7).map(|k| (k as f64 * 10.0).to_radians()).collect();
        let s = summarize(&th, &v, [35.0, 45.0], -20.0);
        assert!((s.argmax_deg - 40.0).abs() < 1e-9);
        let at: Vec<f64> = s.lobes.iter().map(|l| l.theta_deg.round()).collect();
        assert_eq!(at, vec![10.0, 60.0]);
        assert!(local_maxima(&[0.0, 0.0]).is_empty());
    }
}
