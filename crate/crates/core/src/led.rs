//! Daily levodopa-equivalent dose (LED) and the accuracy-vs-LED fit.
//!
//! The conversion table is configuration, not code: a CSV with columns
//! `drug,factor,rule` where rule is `plain` (LED += dose × frequency ×
//! factor) or `multiplies_levodopa` (LED += factor × total daily
//! levodopa mg, the standard encoding for COMT inhibitors). The shipped
//! defaults follow the standardized conversion factors in wide use.
//! Drug matching is case-insensitive; entries named `levodopa*` form the
//! base that multiplier rules apply to. Unknown drugs are an error, not
//! a silent skip.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::polyfit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LedRule {
    Plain,
    MultipliesLevodopa,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LedTableEntry {
    pub drug: String,
    pub factor: f64,
    pub rule: LedRule,
}

#[derive(Debug, Clone)]
pub struct LedTable {
    entries: BTreeMap<String, LedTableEntry>,
}

/// The default conversion factors (immediate-release levodopa = 1).
pub const DEFAULT_LED_TABLE: &[(&str, f64, LedRule)] = &[
    ("levodopa", 1.0, LedRule::Plain),
    ("levodopa cr", 0.75, LedRule::Plain),
    ("entacapone", 0.33, LedRule::MultipliesLevodopa),
    ("tolcapone", 0.5, LedRule::MultipliesLevodopa),
    ("pramipexole", 100.0, LedRule::Plain),
    ("ropinirole", 20.0, LedRule::Plain),
    ("rotigotine", 30.0, LedRule::Plain),
    ("selegiline", 10.0, LedRule::Plain),
    ("rasagiline", 100.0, LedRule::Plain),
    ("amantadine", 1.0, LedRule::Plain),
    ("apomorphine", 10.0, LedRule::Plain),
    ("bromocriptine", 10.0, LedRule::Plain),
    ("pergolide", 100.0, LedRule::Plain),
    ("piribedil", 1.0, LedRule::Plain),
];

fn normalize(drug: &str) -> String {
    drug.trim().to_lowercase()
}

impl LedTable {
    pub fn default_table() -> LedTable {
        let entries = DEFAULT_LED_TABLE
            .iter()
            .map(|&(drug, factor, rule)| {
                (drug.to_string(), LedTableEntry { drug: drug.to_string(), factor, rule })
            })
            .collect();
        LedTable { entries }
    }

    pub fn from_csv(path: &Path) -> Result<LedTable> {
        let mut r = csv::Reader::from_path(path)
            .map_err(|e| Error::input(format!("cannot open LED table {}: {e}", path.display())))?;
        let headers = r.headers().map_err(|e| Error::input(format!("LED table: {e}")))?;
        if headers.iter().collect::<Vec<_>>() != ["drug", "factor", "rule"] {
            return Err(Error::input("LED table header must be drug,factor,rule"));
        }
        let mut entries = BTreeMap::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| Error::input(format!("LED table row {}: {e}", i + 2)))?;
            let drug = normalize(&rec[0]);
            let factor: f64 = rec[1]
                .parse()
                .map_err(|_| Error::input(format!("LED table row {}: bad factor", i + 2)))?;
            if !factor.is_finite() || factor < 0.0 {
                return Err(Error::input(format!("LED table row {}: negative factor", i + 2)));
            }
            let rule = match &rec[2] {
                "plain" => LedRule::Plain,
                "multiplies_levodopa" => LedRule::MultipliesLevodopa,
                other => {
                    return Err(Error::input(format!(
                        "LED table row {}: unknown rule '{other}'",
                        i + 2
                    )))
                }
            };
            entries.insert(drug.clone(), LedTableEntry { drug, factor, rule });
        }
        Ok(LedTable { entries })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["drug", "factor", "rule"])?;
        for entry in self.entries.values() {
            let rule = match entry.rule {
                LedRule::Plain => "plain",
                LedRule::MultipliesLevodopa => "multiplies_levodopa",
            };
            w.write_record([entry.drug.as_str(), &entry.factor.to_string(), rule])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn get(&self, drug: &str) -> Option<&LedTableEntry> {
        self.entries.get(&normalize(drug))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimenEntry {
    pub drug: String,
    pub dose_mg: f64,
    pub times_per_day: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LedRecord {
    pub participant_id: String,
    pub regimen: Vec<RegimenEntry>,
    pub daily_led: f64,
}

/// Total daily LED of a regimen under a conversion table.
pub fn daily_led(regimen: &[RegimenEntry], table: &LedTable) -> Result<f64> {
    let mut plain_total = 0.0;
    let mut levodopa_base = 0.0;
    let mut multiplier_sum = 0.0;
    for entry in regimen {
        if entry.dose_mg < 0.0 || !entry.dose_mg.is_finite() {
            return Err(Error::contract(format!("negative or non-finite dose for {}", entry.drug)));
        }
        if entry.times_per_day < 0.0 || !entry.times_per_day.is_finite() {
            return Err(Error::contract(format!("bad daily frequency for {}", entry.drug)));
        }
        let row = table.get(&entry.drug).ok_or_else(|| {
            Error::contract(format!("unknown drug '{}' (not in the LED table)", entry.drug))
        })?;
        let daily_mg = entry.dose_mg * entry.times_per_day;
        match row.rule {
            LedRule::Plain => {
                plain_total += daily_mg * row.factor;
                if normalize(&entry.drug).starts_with("levodopa") {
                    levodopa_base += daily_mg;
                }
            }
            LedRule::MultipliesLevodopa => multiplier_sum += row.factor,
        }
    }
    Ok(plain_total + multiplier_sum * levodopa_base)
}

/// Regimens CSV: participant_id,drug,dose_mg,times_per_day.
pub fn read_regimens_csv(path: &Path) -> Result<BTreeMap<String, Vec<RegimenEntry>>> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| Error::input(format!("cannot open regimens {}: {e}", path.display())))?;
    let headers = r.headers().map_err(|e| Error::input(format!("regimens: {e}")))?;
    if headers.iter().collect::<Vec<_>>() != ["participant_id", "drug", "dose_mg", "times_per_day"]
    {
        return Err(Error::input(
            "regimens header must be participant_id,drug,dose_mg,times_per_day",
        ));
    }
    let mut out: BTreeMap<String, Vec<RegimenEntry>> = BTreeMap::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::input(format!("regimens row {}: {e}", i + 2)))?;
        let dose_mg: f64 = rec[2]
            .parse()
            .map_err(|_| Error::input(format!("regimens row {}: bad dose", i + 2)))?;
        let times_per_day: f64 = rec[3]
            .parse()
            .map_err(|_| Error::input(format!("regimens row {}: bad frequency", i + 2)))?;
        out.entry(rec[0].to_string()).or_default().push(RegimenEntry {
            drug: rec[1].to_string(),
            dose_mg,
            times_per_day,
        });
    }
    Ok(out)
}

/// One participant's point on the accuracy-vs-LED plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedAccuracyPoint {
    pub led_mg: f64,
    pub accuracy: f64,
    pub n_instances: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFit {
    /// Coefficients in ascending powers over LED in mg.
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    /// Stationary point −c1/(2 c2); absent for a degenerate parabola.
    pub vertex_mg: Option<f64>,
    pub led_min: f64,
    pub led_max: f64,
    pub fitted_at_min: f64,
    pub fitted_at_max: f64,
    pub n_points: usize,
    pub min_instances: usize,
}

impl QuadraticFit {
    pub fn predict(&self, led: f64) -> f64 {
        self.c0 + self.c1 * led + self.c2 * led * led
    }
}

/// Default participant filter matching the published footnote.
pub const DEFAULT_MIN_INSTANCES: usize = 20;

/// Ordinary least-squares quadratic of accuracy on LED, after dropping
/// participants with fewer than `min_instances` instances. LED is
/// rescaled internally so the normal equations stay well conditioned.
pub fn accuracy_vs_led(points: &[LedAccuracyPoint], min_instances: usize) -> Result<QuadraticFit> {
    let kept: Vec<&LedAccuracyPoint> =
        points.iter().filter(|p| p.n_instances >= min_instances).collect();
    if kept.len() < 3 {
        return Err(Error::contract(format!(
            "accuracy_vs_led: {} points after the min-instance filter, need at least 3",
            kept.len()
        )));
    }
    let mut distinct: Vec<f64> = kept.iter().map(|p| p.led_mg).collect();
    distinct.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::contract(
            "accuracy_vs_led: need at least 3 distinct LED values for a quadratic fit",
        ));
    }

    let scale = kept.iter().map(|p| p.led_mg.abs()).fold(0.0, f64::max).max(1.0);
    let x: Vec<f64> = kept.iter().map(|p| p.led_mg / scale).collect();
    let y: Vec<f64> = kept.iter().map(|p| p.accuracy).collect();
    let c = polyfit(&x, &y, 2)?;
    let (c0, c1, c2) = (c[0], c[1] / scale, c[2] / (scale * scale));

    let led_min = distinct[0];
    let led_max = *distinct.last().unwrap();
    let vertex_mg = (c2 != 0.0).then(|| -c1 / (2.0 * c2));
    let fit = QuadraticFit {
        c0,
        c1,
        c2,
        vertex_mg,
        led_min,
        led_max,
        fitted_at_min: 0.0,
        fitted_at_max: 0.0,
        n_points: kept.len(),
        min_instances,
    };
    Ok(QuadraticFit {
        fitted_at_min: fit.predict(led_min),
        fitted_at_max: fit.predict(led_max),
        ..fit
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn entry(drug: &str, dose: f64, times: f64) -> RegimenEntry {
        RegimenEntry { drug: drug.to_string(), dose_mg: dose, times_per_day: times }
    }

    #[test]
    fn identity_factor_levodopa() {
        let table = LedTable::default_table();
        let led = daily_led(&[entry("levodopa", 100.0, 3.0)], &table).unwrap();
        assert_relative_eq!(led, 300.0);
    }

    #[test]
    fn agonist_factor() {
        let table = LedTable::default_table();
        let led = daily_led(&[entry("pramipexole", 0.5, 3.0)], &table).unwrap();
        assert_relative_eq!(led, 150.0);
    }

    #[test]
    fn empty_regimen_is_zero() {
        assert_eq!(daily_led(&[], &LedTable::default_table()).unwrap(), 0.0);
    }

    #[test]
    fn comt_inhibitor_multiplies_levodopa() {
        let table = LedTable::default_table();
        let led = daily_led(
            &[entry("levodopa", 100.0, 3.0), entry("Entacapone", 200.0, 3.0)],
            &table,
        )
        .unwrap();
        // 300 + 0.33 * 300; the inhibitor's own mg does not count.
        assert_relative_eq!(led, 300.0 + 0.33 * 300.0);
    }

    #[test]
    fn unknown_drug_is_an_error_naming_it() {
        let err = daily_led(&[entry("mystery", 1.0, 1.0)], &LedTable::default_table());
        assert!(err.unwrap_err().to_string().contains("mystery"));
    }

    #[test]
    fn table_csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("led_table.csv");
        LedTable::default_table().write_csv(&path).unwrap();
        let table = LedTable::from_csv(&path).unwrap();
        assert_eq!(table.get("rotigotine").unwrap().factor, 30.0);
        assert_eq!(table.get("ENTACAPONE").unwrap().rule, LedRule::MultipliesLevodopa);
    }

    #[test]
    fn exact_parabola_recovered() {
        let truth = |led: f64| 0.5 + 3.0e-4 * led - 1.2e-7 * led * led;
        let points: Vec<LedAccuracyPoint> = (0..12)
            .map(|i| {
                let led = 100.0 + 250.0 * i as f64;
                LedAccuracyPoint { led_mg: led, accuracy: truth(led), n_instances: 30 }
            })
            .collect();
        let fit = accuracy_vs_led(&points, 20).unwrap();
        assert_relative_eq!(fit.c0, 0.5, epsilon = 1e-9);
        assert_relative_eq!(fit.c1, 3.0e-4, epsilon = 1e-9);
        assert_relative_eq!(fit.c2, -1.2e-7, epsilon = 1e-9);
        let vertex = fit.vertex_mg.unwrap();
        assert_relative_eq!(vertex, 3.0e-4 / (2.0 * 1.2e-7), epsilon = 1e-6);
    }

    #[test]
    fn constant_accuracy_gives_flat_fit() {
        let points: Vec<LedAccuracyPoint> = (0..5)
            .map(|i| LedAccuracyPoint {
                led_mg: 200.0 * (i + 1) as f64,
                accuracy: 0.7,
                n_instances: 25,
            })
            .collect();
        let fit = accuracy_vs_led(&points, 20).unwrap();
        assert_relative_eq!(fit.c0, 0.7, epsilon = 1e-9);
        assert!(fit.c1.abs() < 1e-12);
        assert!(fit.c2.abs() < 1e-15);
    }

    #[test]
    fn filters_and_degenerate_designs() {
        let mk = |led: f64, n: usize| LedAccuracyPoint { led_mg: led, accuracy: 0.6, n_instances: n };
        // Too few after filtering.
        assert!(accuracy_vs_led(&[mk(100.0, 30), mk(200.0, 30), mk(300.0, 5)], 20).is_err());
        // Fewer than 3 distinct LED values.
        assert!(accuracy_vs_led(&[mk(100.0, 30), mk(100.0, 30), mk(200.0, 30)], 20).is_err());
    }
}
