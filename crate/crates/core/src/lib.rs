//! Core algorithms: Python parsing, static checks, completion attribution,
//! dataset extraction and metrics.

pub mod attribution;
pub mod dataset;
pub mod driver;
pub mod lint;
pub mod metrics;
pub mod pyast;

pub use attribution::{CompletionSample, ErrorType, Outcome, SampleVerdict, VerdictRecord};
pub use dataset::{Problem, SkipReason};
pub use lint::{Diagnostic, LintCheckKind, NameKind};
pub use metrics::{ConditionalReport, EvalReport};
pub use pyast::{AstErrorCategory, SourceText, SyntaxErrorReport};
