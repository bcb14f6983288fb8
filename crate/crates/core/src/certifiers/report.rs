use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::DenseVector;

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    /// The sampled condition holds with the reported constant (and exponent,
    /// for fitted power laws).
    Satisfied {
        constant: f64,
        exponent: Option<f64>,
    },
    /// The condition fails; `step` is the first failing iteration for
    /// trajectory audits.
    Violated {
        step: Option<usize>,
    },
    /// The subgradient norm stays bounded away from zero near `x*`, which
    /// gives subregularity for every exponent `θ ≥ 1`.
    BoundedBelowRegime {
        c2: f64,
        min_grad_norm: f64,
    },
    Inconclusive {
        reason: String,
    },
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Satisfied { .. } => "satisfied",
            Verdict::Violated { .. } => "violated",
            Verdict::BoundedBelowRegime { .. } => "bounded_below_regime",
            Verdict::Inconclusive { .. } => "inconclusive",
        }
    }

    pub fn is_satisfied(&self) -> bool {
        matches!(self, Verdict::Satisfied { .. })
    }

    pub fn is_violated(&self) -> bool {
        matches!(self, Verdict::Violated { .. })
    }
}

/// Outcome of one certifier run. `statistic` is the extremal value the
/// verdict is based on; re-evaluating it at `witness` reproduces it exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct CertificateReport {
    pub certifier: String,
    pub problem: String,
    pub samples: usize,
    pub statistic_name: String,
    pub statistic: f64,
    /// Labeled witness points, e.g. `x` and `y` for a Verdier pair.
    pub witness: Vec<(String, DenseVector)>,
    pub verdict: Verdict,
    pub details: Vec<(String, String)>,
}

impl CertificateReport {
    pub fn witness_point(&self, label: &str) -> Option<&DenseVector> {
        self.witness
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, v)| v)
    }

    pub fn detail(&self, key: &str) -> Option<&str> {
        self.details
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub(crate) fn push_detail(&mut self, key: &str, value: impl ToString) {
        self.details.push((key.to_string(), value.to_string()));
    }

    /// One `key = value` pair per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: &str| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("certifier", &self.certifier);
        kv("problem", &self.problem);
        kv("samples", &self.samples.to_string());
        kv("statistic_name", &self.statistic_name);
        kv("statistic", &self.statistic.to_string());
        kv("verdict", self.verdict.label());
        match &self.verdict {
            Verdict::Satisfied { constant, exponent } => {
                kv("verdict.constant", &constant.to_string());
                if let Some(e) = exponent {
                    kv("verdict.exponent", &e.to_string());
                }
            }
            Verdict::Violated { step } => {
                if let Some(k) = step {
                    kv("verdict.step", &k.to_string());
                }
            }
            Verdict::BoundedBelowRegime { c2, min_grad_norm } => {
                kv("verdict.c2", &c2.to_string());
                kv("verdict.min_grad_norm", &min_grad_norm.to_string());
            }
            Verdict::Inconclusive { reason } => kv("verdict.reason", reason),
        }
        for (label, point) in &self.witness {
            let coords: Vec<String> = point.as_slice().iter().map(f64::to_string).collect();
            kv(&format!("witness.{label}"), &coords.join(","));
        }
        for (k, v) in &self.details {
            kv(&format!("detail.{k}"), v);
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<CertificateReport> {
        let mut fields: Vec<(String, String)> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line.split_once(" = ").ok_or_else(|| Error::MalformedCsv {
                line: i + 1,
                reason: "expected `key = value`".into(),
            })?;
            fields.push((k.to_string(), v.to_string()));
        }
        let get = |key: &str| -> Result<&str> {
            fields
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| Error::MalformedCsv {
                    line: 0,
                    reason: format!("missing key `{key}`"),
                })
        };
        let num = |key: &str| -> Result<f64> {
            get(key)?.parse::<f64>().map_err(|e| Error::MalformedCsv {
                line: 0,
                reason: format!("`{key}`: {e}"),
            })
        };
        let verdict = match get("verdict")? {
            "satisfied" => Verdict::Satisfied {
                constant: num("verdict.constant")?,
                exponent: get("verdict.exponent")
                    .ok()
                    .map(|_| num("verdict.exponent"))
                    .transpose()?,
            },
            "violated" => Verdict::Violated {
                step: get("verdict.step").ok().and_then(|s| s.parse().ok()),
            },
            "bounded_below_regime" => Verdict::BoundedBelowRegime {
                c2: num("verdict.c2")?,
                min_grad_norm: num("verdict.min_grad_norm")?,
            },
            "inconclusive" => Verdict::Inconclusive {
                reason: get("verdict.reason").unwrap_or("").to_string(),
            },
            other => {
                return Err(Error::MalformedCsv {
                    line: 0,
                    reason: format!("unknown verdict `{other}`"),
                })
            }
        };
        let mut witness = Vec::new();
        let mut details = Vec::new();
        for (k, v) in &fields {
            if let Some(label) = k.strip_prefix("witness.") {
                let coords = v
                    .split(',')
                    .map(|t| t.parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| Error::MalformedCsv {
                        line: 0,
                        reason: format!("witness `{label}`: {e}"),
                    })?;
                witness.push((label.to_string(), DenseVector::new(coords)?));
            } else if let Some(key) = k.strip_prefix("detail.") {
                details.push((key.to_string(), v.clone()));
            }
        }
        Ok(CertificateReport {
            certifier: get("certifier")?.to_string(),
            problem: get("problem")?.to_string(),
            samples: get("samples")?.parse().map_err(|e| Error::MalformedCsv {
                line: 0,
                reason: format!("samples: {e}"),
            })?,
            statistic_name: get("statistic_name")?.to_string(),
            statistic: num("statistic")?,
            witness,
            verdict,
            details,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let report = CertificateReport {
            certifier: "verdier".into(),
            problem: "relu-l1".into(),
            samples: 100,
            statistic_name: "max_ratio".into(),
            statistic: 5f64.sqrt(),
            witness: vec![
                ("x".into(), DenseVector::new(vec![1.0, 0.9, -1e-9]).unwrap()),
                ("y".into(), DenseVector::new(vec![1.0, 0.9, 0.0]).unwrap()),
            ],
            verdict: Verdict::Satisfied {
                constant: 5f64.sqrt(),
                exponent: None,
            },
            details: vec![("note".into(), "selection norm used".into())],
        };
        let text = report.to_text();
        assert!(text.contains("verdict = satisfied\n"));
        assert_eq!(CertificateReport::parse_text(&text).unwrap(), report);

        let mut other = report.clone();
        other.verdict = Verdict::BoundedBelowRegime {
            c2: 0.3,
            min_grad_norm: 0.75,
        };
        assert_eq!(
            CertificateReport::parse_text(&other.to_text()).unwrap(),
            other
        );
        other.verdict = Verdict::Violated { step: Some(7) };
        assert_eq!(
            CertificateReport::parse_text(&other.to_text()).unwrap(),
            other
        );
        assert!(CertificateReport::parse_text("certifier verdier").is_err());
    }
}
