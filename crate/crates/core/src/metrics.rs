//! Aggregation of verdicts into rate reports, conditional statistics and
//! edit similarity.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::attribution::{dedup_error_types, ErrorType, Outcome, SampleVerdict};
use crate::lint::LintCheckKind;
use crate::pyast::AstErrorCategory;

pub const REPORT_FORMAT_VERSION: u32 = 1;
/// Tag for the similarity definition used in reports.
pub const EDIT_SIMILARITY_DEFINITION: &str = "char-levenshtein-normalized-v1";

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("duplicate verdict for problem {0:?} sample {1}")]
    DuplicateKey(String, u32),
    #[error("no samples")]
    Empty,
}

/// Counts for one error type under the context/completion split.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionalCounts {
    /// Samples whose context has the error type.
    pub in_context: u64,
    pub in_context_and_completion: u64,
    pub not_in_context: u64,
    pub not_in_context_in_completion: u64,
}

/// Partial aggregate. Merging two partials built from disjoint verdict sets
/// gives the same result as aggregating their union.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Aggregate {
    keys: HashSet<(String, u32)>,
    pub total: u64,
    pub discarded: u64,
    pub ast_eof: u64,
    pub ast_non_eof: u64,
    pub ast_by_category: BTreeMap<AstErrorCategory, u64>,
    pub lint_by_kind: BTreeMap<LintCheckKind, u64>,
    pub lint_samples: u64,
    pub undefined_variable: u64,
    pub undefined_function: u64,
    pub conditional: BTreeMap<LintCheckKind, ConditionalCounts>,
    /// Fixed-point (1e-9) so that merging is exact in any order.
    similarity_sum_nanos: u128,
    pub similarity_count: u64,
}

impl Aggregate {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: &SampleVerdict) -> Result<(), MetricsError> {
        if !self.keys.insert((v.problem_id.clone(), v.sample_index)) {
            return Err(MetricsError::DuplicateKey(
                v.problem_id.clone(),
                v.sample_index,
            ));
        }
        self.total += 1;
        match &v.outcome {
            Outcome::ContextUnparsable => self.discarded += 1,
            Outcome::AstError(r) => {
                if r.is_eof {
                    self.ast_eof += 1;
                } else {
                    self.ast_non_eof += 1;
                }
                *self.ast_by_category.entry(r.category).or_default() += 1;
            }
            Outcome::Lint {
                context_error_kinds,
                undefined_kinds,
                ..
            } => {
                self.lint_samples += 1;
                self.undefined_variable += u64::from(undefined_kinds.variable);
                self.undefined_function += u64::from(undefined_kinds.function);
                let in_x = dedup_error_types(&v.outcome);
                for kind in LintCheckKind::ALL {
                    let x = in_x.contains(&ErrorType::Lint(kind));
                    if x {
                        *self.lint_by_kind.entry(kind).or_default() += 1;
                    }
                    let cell = self.conditional.entry(kind).or_default();
                    if context_error_kinds.contains(&kind) {
                        cell.in_context += 1;
                        cell.in_context_and_completion += u64::from(x);
                    } else {
                        cell.not_in_context += 1;
                        cell.not_in_context_in_completion += u64::from(x);
                    }
                }
            }
        }
        Ok(())
    }

    /// Adds one edit-similarity observation (a percentage).
    pub fn add_similarity(&mut self, value: f64) {
        debug_assert!((0.0..=100.0).contains(&value));
        self.similarity_sum_nanos += (value * 1e9).round() as u128;
        self.similarity_count += 1;
    }

    pub fn merge(mut self, other: Aggregate) -> Result<Aggregate, MetricsError> {
        for key in other.keys {
            if self.keys.contains(&key) {
                return Err(MetricsError::DuplicateKey(key.0, key.1));
            }
            self.keys.insert(key);
        }
        self.total += other.total;
        self.discarded += other.discarded;
        self.ast_eof += other.ast_eof;
        self.ast_non_eof += other.ast_non_eof;
        for (k, n) in other.ast_by_category {
            *self.ast_by_category.entry(k).or_default() += n;
        }
        for (k, n) in other.lint_by_kind {
            *self.lint_by_kind.entry(k).or_default() += n;
        }
        self.lint_samples += other.lint_samples;
        self.undefined_variable += other.undefined_variable;
        self.undefined_function += other.undefined_function;
        for (k, c) in other.conditional {
            let cell = self.conditional.entry(k).or_default();
            cell.in_context += c.in_context;
            cell.in_context_and_completion += c.in_context_and_completion;
            cell.not_in_context += c.not_in_context;
            cell.not_in_context_in_completion += c.not_in_context_in_completion;
        }
        self.similarity_sum_nanos += other.similarity_sum_nanos;
        self.similarity_count += other.similarity_count;
        Ok(self)
    }

    pub fn report(&self) -> Result<EvalReport, MetricsError> {
        if self.total == 0 {
            return Err(MetricsError::Empty);
        }
        let evaluated = self.total - self.discarded;
        let rate = |n: u64| percent(n, evaluated);
        Ok(EvalReport {
            total_samples: self.total,
            discarded_context_unparsable: self.discarded,
            evaluated_samples: evaluated,
            ast_total_count: self.ast_eof + self.ast_non_eof,
            ast_eof_count: self.ast_eof,
            ast_non_eof_count: self.ast_non_eof,
            ast_total_rate: rate(self.ast_eof + self.ast_non_eof),
            ast_eof_rate: rate(self.ast_eof),
            ast_non_eof_rate: rate(self.ast_non_eof),
            ast_counts: AstErrorCategory::ALL
                .iter()
                .map(|&c| (c, self.ast_by_category.get(&c).copied().unwrap_or(0)))
                .collect(),
            ast_rates: AstErrorCategory::ALL
                .iter()
                .map(|&c| (c, rate(self.ast_by_category.get(&c).copied().unwrap_or(0))))
                .collect(),
            lint_counts: LintCheckKind::ALL
                .iter()
                .map(|&k| (k, self.lint_by_kind.get(&k).copied().unwrap_or(0)))
                .collect(),
            lint_rates: LintCheckKind::ALL
                .iter()
                .map(|&k| (k, rate(self.lint_by_kind.get(&k).copied().unwrap_or(0))))
                .collect(),
            undefined_variable_count: self.undefined_variable,
            undefined_function_count: self.undefined_function,
            edit_similarity_mean: (self.similarity_count > 0).then(|| {
                round3(self.similarity_sum_nanos as f64 / 1e9 / self.similarity_count as f64)
            }),
            edit_similarity_samples: self.similarity_count,
        })
    }

    /// UnusedImport is left out unless `include_unused_import` is set.
    pub fn conditional_report(&self, include_unused_import: bool) -> ConditionalReport {
        let rows = LintCheckKind::ALL
            .iter()
            .filter(|&&k| include_unused_import || k != LintCheckKind::UnusedImport)
            .map(|&kind| {
                let c = self.conditional.get(&kind).copied().unwrap_or_default();
                ConditionalRow::from_counts(kind, c)
            })
            .collect();
        ConditionalReport {
            lint_samples: self.lint_samples,
            includes_unused_import: include_unused_import,
            rows,
        }
    }
}

fn percent(n: u64, d: u64) -> Option<f64> {
    (d > 0).then(|| round3(100.0 * n as f64 / d as f64))
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

fn ratio(n: u64, d: u64) -> Option<f64> {
    (d > 0).then(|| n as f64 / d as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub total_samples: u64,
    pub discarded_context_unparsable: u64,
    pub evaluated_samples: u64,
    pub ast_total_count: u64,
    pub ast_eof_count: u64,
    pub ast_non_eof_count: u64,
    /// Percentages with three decimals; `None` when nothing was evaluated.
    pub ast_total_rate: Option<f64>,
    pub ast_eof_rate: Option<f64>,
    pub ast_non_eof_rate: Option<f64>,
    pub ast_counts: BTreeMap<AstErrorCategory, u64>,
    pub ast_rates: BTreeMap<AstErrorCategory, Option<f64>>,
    pub lint_counts: BTreeMap<LintCheckKind, u64>,
    pub lint_rates: BTreeMap<LintCheckKind, Option<f64>>,
    pub undefined_variable_count: u64,
    pub undefined_function_count: u64,
    pub edit_similarity_mean: Option<f64>,
    pub edit_similarity_samples: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionalRow {
    pub kind: LintCheckKind,
    #[serde(flatten)]
    pub counts: ConditionalCounts,
    /// P(e in completion | e in context)
    pub p_x_given_c: Option<f64>,
    pub p_x_given_not_c: Option<f64>,
    pub ratio: Option<f64>,
    /// P(e in context | e in completion)
    pub p_c_given_x: Option<f64>,
}

impl ConditionalRow {
    fn from_counts(kind: LintCheckKind, c: ConditionalCounts) -> Self {
        let p_x_given_c = ratio(c.in_context_and_completion, c.in_context);
        let p_x_given_not_c = ratio(c.not_in_context_in_completion, c.not_in_context);
        let amp = match (p_x_given_c, p_x_given_not_c) {
            (Some(a), Some(b)) if b > 0.0 => Some(a / b),
            _ => None,
        };
        ConditionalRow {
            kind,
            counts: c,
            p_x_given_c,
            p_x_given_not_c,
            ratio: amp,
            p_c_given_x: ratio(
                c.in_context_and_completion,
                c.in_context_and_completion + c.not_in_context_in_completion,
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionalReport {
    /// Samples with a lint outcome; the population of every row.
    pub lint_samples: u64,
    pub includes_unused_import: bool,
    pub rows: Vec<ConditionalRow>,
}

pub fn aggregate<'a>(
    verdicts: impl IntoIterator<Item = &'a SampleVerdict>,
) -> Result<EvalReport, MetricsError> {
    let mut agg = Aggregate::new();
    for v in verdicts {
        agg.add(v)?;
    }
    agg.report()
}

pub fn conditional_stats<'a>(
    verdicts: impl IntoIterator<Item = &'a SampleVerdict>,
    include_unused_import: bool,
) -> Result<ConditionalReport, MetricsError> {
    let mut agg = Aggregate::new();
    for v in verdicts {
        agg.add(v)?;
    }
    if agg.total == 0 {
        return Err(MetricsError::Empty);
    }
    Ok(agg.conditional_report(include_unused_import))
}

/// Character-level edit distance with unit costs.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if ca == cb {
                diag
            } else {
                1 + diag.min(up).min(row[j])
            };
            diag = up;
        }
    }
    row[b.len()]
}

/// `100 * (1 - d / max_len)`; 100 for two empty strings.
pub fn edit_similarity(generation: &str, groundtruth: &str) -> f64 {
    let max = generation.chars().count().max(groundtruth.chars().count());
    if max == 0 {
        return 100.0;
    }
    100.0 * (1.0 - levenshtein(generation, groundtruth) as f64 / max as f64)
}

/// Full report document as written by the `report` command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub format_version: u32,
    pub edit_similarity_definition: String,
    pub run: BTreeMap<String, String>,
    pub report: EvalReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditional: Option<ConditionalReport>,
}

fn cell(x: Option<f64>, digits: usize) -> String {
    x.map_or_else(String::new, |v| format!("{v:.digits$}"))
}

/// One CSV row per error type plus the three AST summary rows.
pub fn report_csv(doc: &ReportDocument) -> String {
    let r = &doc.report;
    let mut out = String::from(
        "format_version,edit_similarity_definition,error_type,count,rate,\
         p_x_given_c,p_x_given_not_c,ratio,p_c_given_x,\
         in_context,in_context_and_completion,not_in_context,not_in_context_in_completion\n",
    );
    let prefix = format!("{},{}", doc.format_version, doc.edit_similarity_definition);
    let mut plain = |name: String, count: u64, rate: Option<f64>| {
        out.push_str(&format!(
            "{prefix},{name},{count},{},,,,,,,,\n",
            cell(rate, 3)
        ));
    };
    plain("ast:total".into(), r.ast_total_count, r.ast_total_rate);
    plain("ast:eof".into(), r.ast_eof_count, r.ast_eof_rate);
    plain(
        "ast:non_eof".into(),
        r.ast_non_eof_count,
        r.ast_non_eof_rate,
    );
    for c in AstErrorCategory::ALL {
        plain(format!("ast:{c}"), r.ast_counts[&c], r.ast_rates[&c]);
    }
    for k in LintCheckKind::ALL {
        let row = doc
            .conditional
            .as_ref()
            .and_then(|c| c.rows.iter().find(|row| row.kind == k));
        let rate = cell(r.lint_rates[&k], 3);
        match row {
            None => out.push_str(&format!(
                "{prefix},lint:{k},{},{rate},,,,,,,,\n",
                r.lint_counts[&k]
            )),
            Some(row) => out.push_str(&format!(
                "{prefix},lint:{k},{},{rate},{},{},{},{},{},{},{},{}\n",
                r.lint_counts[&k],
                cell(row.p_x_given_c, 6),
                cell(row.p_x_given_not_c, 6),
                cell(row.ratio, 6),
                cell(row.p_c_given_x, 6),
                row.counts.in_context,
                row.counts.in_context_and_completion,
                row.counts.not_in_context,
                row.counts.not_in_context_in_completion,
            )),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attribution::UndefinedKinds;
    use crate::lint::Diagnostic;
    use crate::pyast::SyntaxErrorReport;
    use std::collections::BTreeSet;

    fn lint(id: usize, ctx: &[LintCheckKind], x: &[LintCheckKind]) -> SampleVerdict {
        SampleVerdict {
            problem_id: format!("p{id}"),
            sample_index: 0,
            outcome: Outcome::Lint {
                attributed: x
                    .iter()
                    .map(|&kind| Diagnostic {
                        kind,
                        symbol: "n".into(),
                        line: 9,
                        column: 0,
                        message: String::new(),
                        related_line: None,
                    })
                    .collect(),
                context_error_kinds: ctx.iter().copied().collect::<BTreeSet<_>>(),
                undefined_kinds: UndefinedKinds::default(),
            },
        }
    }

    fn ast(id: usize, eof: bool) -> SampleVerdict {
        let category = if eof {
            AstErrorCategory::UnexpectedEof
        } else {
            AstErrorCategory::InvalidSyntax
        };
        SampleVerdict {
            problem_id: format!("p{id}"),
            sample_index: 0,
            outcome: Outcome::AstError(SyntaxErrorReport {
                category,
                is_eof: eof,
                line: 1,
                column: 0,
                raw_message: String::new(),
            }),
        }
    }

    #[test]
    fn ast_rates_split_by_eof() {
        let mut vs: Vec<SampleVerdict> = (0..1000).map(|i| lint(i, &[], &[])).collect();
        for (i, v) in vs.iter_mut().take(72).enumerate() {
            *v = ast(i, i < 71);
        }
        let r = aggregate(&vs).unwrap();
        assert_eq!(r.ast_total_rate, Some(7.2));
        assert_eq!(r.ast_eof_rate, Some(7.1));
        assert_eq!(r.ast_non_eof_rate, Some(0.1));
    }

    #[test]
    fn empty_and_duplicates_are_errors() {
        assert_eq!(aggregate(&[]), Err(MetricsError::Empty));
        let v = lint(1, &[], &[]);
        assert!(matches!(
            aggregate(&[v.clone(), v]),
            Err(MetricsError::DuplicateKey(..))
        ));
    }

    #[test]
    fn type_counted_once_per_sample() {
        let u = LintCheckKind::UndefinedName;
        let r = aggregate(&[lint(0, &[], &[u, u]), lint(1, &[], &[])]).unwrap();
        assert_eq!(r.lint_counts[&u], 1);
        assert_eq!(r.lint_rates[&u], Some(50.0));
    }

    #[test]
    fn only_discarded_gives_null_rates() {
        let v = SampleVerdict {
            problem_id: "a".into(),
            sample_index: 0,
            outcome: Outcome::ContextUnparsable,
        };
        let r = aggregate(&[v]).unwrap();
        assert_eq!(r.discarded_context_unparsable, 1);
        assert_eq!(r.ast_total_rate, None);
        assert!(r.lint_rates.values().all(Option::is_none));
    }

    #[test]
    fn conditional_fixture() {
        let e = LintCheckKind::UndefinedName;
        let one = [e];
        let mut vs = Vec::new();
        for i in 0..4 {
            vs.push(lint(i, &[e], if i == 0 { &one[..] } else { &[] }));
        }
        for i in 4..10 {
            vs.push(lint(i, &[], if i == 4 { &one[..] } else { &[] }));
        }
        let rep = conditional_stats(&vs, false).unwrap();
        assert!(rep
            .rows
            .iter()
            .all(|r| r.kind != LintCheckKind::UnusedImport));
        let row = rep.rows.iter().find(|r| r.kind == e).unwrap();
        assert_eq!(row.p_x_given_c, Some(0.25));
        assert!((row.p_x_given_not_c.unwrap() - 1.0 / 6.0).abs() < 1e-12);
        assert!((row.ratio.unwrap() - 1.5).abs() < 1e-12);
        assert_eq!(row.p_c_given_x, Some(0.5));
        let other = rep
            .rows
            .iter()
            .find(|r| r.kind == LintCheckKind::UnusedVariable)
            .unwrap();
        assert_eq!(other.p_x_given_c, None);
        assert_eq!(other.ratio, None);
    }

    #[test]
    fn levenshtein_examples() {
        assert_eq!(levenshtein("abc", "abc"), 0);
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("abc", ""), 3);
        assert_eq!(levenshtein("é", "e"), 1);
    }

    #[test]
    fn similarity_examples() {
        assert_eq!(edit_similarity("same", "same"), 100.0);
        assert_eq!(edit_similarity("", ""), 100.0);
        assert_eq!(edit_similarity("", "abcd"), 0.0);
        assert!((edit_similarity("kitten", "sitting") - 57.142857).abs() < 1e-6);
    }
}
