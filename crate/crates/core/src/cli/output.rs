//! Report rendering: JSON bodies, CSV tables and decimal annotation.

use num_traits::ToPrimitive;
use serde_json::Value;

use super::CliError;
use crate::rational::{to_decimal, Enclosure, RationalRecord, DECIMAL_DIGITS};
use crate::spectral::SpectralSequence;

pub(crate) struct Rendered {
    pub json: Value,
    pub table: Option<Table>,
}

impl Rendered {
    pub fn new(json: Value, table: Option<Table>) -> Self {
        Rendered { json, table }
    }
}

enum Row {
    Valued(Vec<String>, Enclosure),
    Plain(Vec<String>),
}

/// Key columns followed by an exact value as numerator and denominator.
/// Upper-bound columns appear only when some value is an enclosure.
pub(crate) struct Table {
    keys: Vec<String>,
    value: Option<String>,
    rows: Vec<Row>,
}

impl Table {
    pub fn new(keys: &[&str], value: &str) -> Self {
        Table { keys: keys.iter().map(|s| s.to_string()).collect(), value: Some(value.to_string()), rows: Vec::new() }
    }

    pub fn plain(keys: &[&str]) -> Self {
        Table { keys: keys.iter().map(|s| s.to_string()).collect(), value: None, rows: Vec::new() }
    }

    pub fn push(&mut self, keys: Vec<String>, value: Enclosure) {
        self.rows.push(Row::Valued(keys, value));
    }

    pub fn push_plain(&mut self, keys: Vec<String>) {
        self.rows.push(Row::Plain(keys));
    }

    pub fn to_csv(&self, decimal: bool) -> Result<Vec<u8>, CliError> {
        let err = |e: csv::Error| CliError::Config(e.to_string());
        let mut w = csv::Writer::from_writer(Vec::new());
        let inexact = self.rows.iter().any(|r| matches!(r, Row::Valued(_, v) if !v.is_exact()));
        let mut header = self.keys.clone();
        if let Some(name) = &self.value {
            let col = |s: &str| if name.is_empty() { s.to_string() } else { format!("{name}_{s}") };
            header.extend([col("numerator"), col("denominator")]);
            if decimal {
                header.push(col("decimal"));
            }
            if inexact {
                header.extend([col("upper_numerator"), col("upper_denominator")]);
                if decimal {
                    header.push(col("upper_decimal"));
                }
            }
        }
        w.write_record(&header).map_err(err)?;
        for row in &self.rows {
            let mut rec = Vec::with_capacity(header.len());
            match row {
                Row::Plain(keys) => rec.extend(keys.iter().cloned()),
                Row::Valued(keys, v) => {
                    rec.extend(keys.iter().cloned());
                    for (q, wanted) in [(&v.lower, true), (&v.upper, inexact)] {
                        if wanted {
                            rec.push(q.numer().to_string());
                            rec.push(q.denom().to_string());
                            if decimal {
                                rec.push(to_decimal(q, DECIMAL_DIGITS));
                            }
                        }
                    }
                }
            }
            w.write_record(&rec).map_err(err)?;
        }
        w.into_inner().map_err(|e| CliError::Config(e.to_string()))
    }
}

/// Adds a `decimal` field to every `{num, den}` object in `value`.
pub(crate) fn add_decimals(value: &mut Value) {
    match value {
        Value::Object(map) => {
            if map.len() == 2 && map.get("num").is_some_and(Value::is_string) && map.get("den").is_some_and(Value::is_string)
            {
                let record: Result<RationalRecord, _> = serde_json::from_value(Value::Object(map.clone()));
                if let Some(q) = record.ok().and_then(|r| r.value().ok()) {
                    map.insert("decimal".into(), Value::String(to_decimal(&q, DECIMAL_DIGITS)));
                }
                return;
            }
            map.values_mut().for_each(add_decimals);
        }
        Value::Array(items) => items.iter_mut().for_each(add_decimals),
        _ => {}
    }
}

fn midpoint(e: &Enclosure) -> f64 {
    let lo = e.lower.to_f64().unwrap_or(f64::NAN);
    let hi = e.upper.to_f64().unwrap_or(f64::NAN);
    0.5 * (lo + hi)
}

/// `c(0) + 2 Σ_{m=1}^{M} (1 - m/(M+1)) c(m) cos(mθ)` on `points` evenly spaced
/// angles in `[0, π]`, using enclosure midpoints.
pub(crate) fn fejer_periodogram(seq: &SpectralSequence, points: usize) -> Vec<(f64, f64)> {
    let values: Vec<f64> = seq.nonnegative().iter().map(midpoint).collect();
    let big_m = seq.max_lag() as f64;
    (0..points)
        .map(|j| {
            let theta = if points > 1 { std::f64::consts::PI * j as f64 / (points - 1) as f64 } else { 0.0 };
            let tail: f64 = values
                .iter()
                .enumerate()
                .skip(1)
                .map(|(m, c)| (1.0 - m as f64 / (big_m + 1.0)) * c * (m as f64 * theta).cos())
                .sum();
            (theta, values[0] + 2.0 * tail)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use serde_json::json;

    #[test]
    fn csv_adds_upper_columns_only_when_needed() {
        let mut t = Table::new(&["m"], "");
        t.push(vec!["0".into()], Enclosure::exact(ratio(1, 3)));
        let s = String::from_utf8(t.to_csv(false).unwrap()).unwrap();
        assert_eq!(s, "m,numerator,denominator\n0,1,3\n");
        t.push(vec!["1".into()], Enclosure::new(ratio(0, 1), ratio(1, 2)));
        let s = String::from_utf8(t.to_csv(false).unwrap()).unwrap();
        assert_eq!(s, "m,numerator,denominator,upper_numerator,upper_denominator\n0,1,3,1,3\n1,0,1,1,2\n");
    }

    #[test]
    fn decimals_are_added_recursively() {
        let mut v = json!({"a": [{"num": "1", "den": "4"}], "b": {"num": "x"}});
        add_decimals(&mut v);
        assert_eq!(v["a"][0]["decimal"], json!("2.50000000000000000000000000000e-1"));
        assert!(v["b"].get("decimal").is_none());
    }
}
