//! Case-study reports: support sizes and renormalized percentages per
//! strategy, laid out like a token-level comparison table.

use std::fmt::Write as _;

use bandlab_core::{StrategyConfig, TruncationResult};
use serde::Serialize;

use crate::dist_file::Distribution;
use crate::error::CliError;
use crate::format::sig6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TokenRow {
    pub index: usize,
    pub token: String,
    pub original_pct: f64,
    pub renormalized_pct: f64,
}

/// One strategy's outcome on one distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub strategy: String,
    pub config: StrategyConfig,
    pub support_size: usize,
    pub threshold: Option<f64>,
    pub bandwidth: Option<f64>,
    /// The highest-probability support members, at most `top` of them.
    pub tokens: Vec<TokenRow>,
    /// Renormalized percentages summed over the whole support.
    pub renormalized_total_pct: f64,
    /// Full support, token indices in rank order.
    pub support: Vec<usize>,
}

impl ReportRow {
    fn new(
        name: String,
        config: StrategyConfig,
        result: &TruncationResult,
        tokens: &[String],
        top: usize,
    ) -> Self {
        let rows = result
            .support
            .iter()
            .zip(&result.original)
            .zip(&result.renormalized)
            .take(top)
            .map(|((&index, &orig), &renorm)| TokenRow {
                index,
                token: tokens[index].clone(),
                original_pct: 100.0 * orig,
                renormalized_pct: 100.0 * renorm,
            })
            .collect();
        Self {
            strategy: name,
            config,
            support_size: result.support_size(),
            threshold: result.threshold,
            bandwidth: result.bandwidth.map(|b| b.clamped_bandwidth),
            tokens: rows,
            renormalized_total_pct: 100.0 * result.renormalized.iter().sum::<f64>(),
            support: result.support.clone(),
        }
    }

    fn renormalized_pct_of(&self, result: &TruncationResult, index: usize) -> Option<f64> {
        debug_assert_eq!(self.support, result.support);
        result
            .support
            .iter()
            .position(|&s| s == index)
            .map(|pos| 100.0 * result.renormalized[pos])
    }
}

/// Column names: the bare strategy name unless two configs share it.
pub fn column_names(configs: &[StrategyConfig]) -> Vec<String> {
    configs
        .iter()
        .map(|c| {
            let shared = configs.iter().filter(|o| o.name() == c.name()).count() > 1;
            if shared {
                c.strategy.label()
            } else {
                c.name().to_string()
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseStudy {
    pub prompt: Option<String>,
    pub temperature: f64,
    pub rows: Vec<ReportRow>,
    /// Top tokens of the (tempered) input: index, token, percentage.
    #[serde(skip)]
    top_tokens: Vec<(usize, String, f64)>,
    #[serde(skip)]
    results: Vec<TruncationResult>,
}

/// Applies every config to `dist`. All configs are expected to share one
/// temperature; the original-probability column uses the first one's.
pub fn build_case_study(
    dist: &Distribution,
    configs: &[StrategyConfig],
    top: usize,
) -> Result<CaseStudy, CliError> {
    if configs.is_empty() {
        return Err(CliError::Usage("no strategy selected".into()));
    }
    let temperature = configs[0].temperature;
    let tempered = dist.tempered(temperature)?;
    let probs = tempered.probs();
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]).then(a.cmp(&b)));
    let top_tokens = order
        .into_iter()
        .take(top)
        .map(|i| (i, dist.tokens[i].clone(), 100.0 * probs[i]))
        .collect();

    let names = column_names(configs);
    let mut rows = Vec::with_capacity(configs.len());
    let mut results = Vec::with_capacity(configs.len());
    for (config, name) in configs.iter().zip(names) {
        let result = dist.truncate(config)?;
        rows.push(ReportRow::new(name, *config, &result, &dist.tokens, top));
        results.push(result);
    }
    Ok(CaseStudy {
        prompt: dist.prompt.clone(),
        temperature,
        rows,
        top_tokens,
        results,
    })
}

impl CaseStudy {
    /// Fixed-width table: one column per strategy, a support-size row, then
    /// one row per top token with renormalized percentages (`-` when the
    /// token was pruned).
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        if let Some(prompt) = &self.prompt {
            let _ = writeln!(out, "Prompt: {prompt:?}");
        }
        let token_width = self
            .top_tokens
            .iter()
            .map(|(_, t, _)| format!("{t:?}").chars().count())
            .chain([5])
            .max()
            .unwrap_or(5);
        let col_width = self
            .rows
            .iter()
            .map(|r| r.strategy.len())
            .chain([9])
            .max()
            .unwrap_or(9)
            + 2;

        let _ = write!(out, "{:<token_width$} {:>9}", "Token", "Orig(%)");
        for row in &self.rows {
            let _ = write!(out, "{:>col_width$}", row.strategy);
        }
        out.push('\n');

        let _ = write!(out, "{:<token_width$} {:>9}", "|S|", "");
        for row in &self.rows {
            let _ = write!(out, "{:>col_width$}", row.support_size);
        }
        out.push('\n');

        for (index, token, pct) in &self.top_tokens {
            let _ = write!(out, "{:<token_width$} {:>9.2}", format!("{token:?}"), pct);
            for (row, result) in self.rows.iter().zip(&self.results) {
                let cell = match row.renormalized_pct_of(result, *index) {
                    Some(p) => format!("{p:.1}"),
                    None => "-".to_string(),
                };
                let _ = write!(out, "{cell:>col_width$}");
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    /// One line per (strategy, printed token).
    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = crate::csv_writer(Vec::new());
        let to_csv_err = |e: csv::Error| CliError::Usage(format!("csv encoding failed: {e}"));
        w.write_record([
            "strategy",
            "support_size",
            "threshold",
            "bandwidth",
            "rank",
            "token",
            "original_pct",
            "renormalized_pct",
        ])
        .map_err(to_csv_err)?;
        for row in &self.rows {
            for (rank, t) in row.tokens.iter().enumerate() {
                w.write_record([
                    row.strategy.clone(),
                    row.support_size.to_string(),
                    row.threshold.map(sig6).unwrap_or_default(),
                    row.bandwidth.map(sig6).unwrap_or_default(),
                    (rank + 1).to_string(),
                    t.token.clone(),
                    sig6(t.original_pct),
                    sig6(t.renormalized_pct),
                ])
                .map_err(to_csv_err)?;
            }
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::Usage(format!("csv encoding failed: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}
