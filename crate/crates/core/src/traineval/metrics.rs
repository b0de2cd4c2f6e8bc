use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("{scores} scores but {labels} labels")]
    Length { scores: usize, labels: usize },
    #[error("no examples to evaluate")]
    Empty,
    #[error("labels contain a single class; AUC and PRAUC are undefined")]
    SingleClass,
    #[error("label {0} is not 0 or 1")]
    Label(u8),
    #[error("non-finite score at index {0}")]
    Score(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    /// Counts with `score >= threshold` predicted positive.
    pub fn from_scores(scores: &[f64], labels: &[u8], threshold: f64) -> Self {
        let mut c = ConfusionCounts::default();
        for (&s, &y) in scores.iter().zip(labels) {
            match (s >= threshold, y == 1) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Threshold metrics derived from a confusion matrix. A metric whose
/// denominator is zero is reported as 0 and its name listed in
/// `zero_denominator`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountMetrics {
    #[serde(rename = "ACC")]
    pub acc: f64,
    #[serde(rename = "F1")]
    pub f1: f64,
    #[serde(rename = "SE")]
    pub se: f64,
    #[serde(rename = "SP")]
    pub sp: f64,
    #[serde(rename = "MCC")]
    pub mcc: f64,
    #[serde(rename = "BA")]
    pub ba: f64,
    #[serde(rename = "PPV")]
    pub ppv: f64,
    #[serde(rename = "NPV")]
    pub npv: f64,
    pub zero_denominator: Vec<String>,
}

impl CountMetrics {
    pub fn from_counts(c: &ConfusionCounts) -> Self {
        let (tp, fp, tn, fn_) = (c.tp as f64, c.fp as f64, c.tn as f64, c.fn_ as f64);
        let mut flags = Vec::new();
        let mut ratio = |name: &str, num: f64, den: f64| {
            if den == 0.0 {
                flags.push(name.to_string());
                0.0
            } else {
                num / den
            }
        };
        let acc = ratio("ACC", tp + tn, tp + tn + fp + fn_);
        let f1 = ratio("F1", 2.0 * tp, 2.0 * tp + fn_ + fp);
        let se = ratio("SE", tp, tp + fn_);
        let sp = ratio("SP", tn, tn + fp);
        let mcc = ratio(
            "MCC",
            tp * tn - fn_ * fp,
            ((tp + fn_) * (tp + fp) * (tn + fn_) * (tn + fp)).sqrt(),
        );
        let ppv = ratio("PPV", tp, tp + fp);
        let npv = ratio("NPV", tn, tn + fn_);
        CountMetrics {
            acc,
            f1,
            se,
            sp,
            mcc,
            ba: (se + sp) / 2.0,
            ppv,
            npv,
            zero_denominator: flags,
        }
    }
}

/// The ten-metric report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    #[serde(rename = "ACC")]
    pub acc: f64,
    #[serde(rename = "AUC")]
    pub auc: f64,
    #[serde(rename = "F1")]
    pub f1: f64,
    #[serde(rename = "SE")]
    pub se: f64,
    #[serde(rename = "SP")]
    pub sp: f64,
    #[serde(rename = "MCC")]
    pub mcc: f64,
    #[serde(rename = "BA")]
    pub ba: f64,
    #[serde(rename = "PRAUC")]
    pub prauc: f64,
    #[serde(rename = "PPV")]
    pub ppv: f64,
    #[serde(rename = "NPV")]
    pub npv: f64,
    pub counts: ConfusionCounts,
    pub threshold: f64,
    pub zero_denominator: Vec<String>,
}

/// Metric names in report order.
pub const METRIC_NAMES: [&str; 10] =
    ["ACC", "AUC", "F1", "SE", "SP", "MCC", "BA", "PRAUC", "PPV", "NPV"];

/// Column order of printed comparison tables.
pub const TABLE_COLUMNS: [&str; 10] =
    ["SE", "SP", "MCC", "ACC", "AUC", "F1", "BA", "PRAUC", "PPV", "NPV"];

/// Tab-separated header plus one row per `(model, cells)` entry.
pub fn format_table(rows: &[(String, Vec<String>)]) -> String {
    let mut out = format!("Model\t{}\n", TABLE_COLUMNS.join("\t"));
    for (model, cells) in rows {
        out.push_str(&format!("{model}\t{}\n", cells.join("\t")));
    }
    out
}

impl MetricsReport {
    /// One table row at four decimals in [`TABLE_COLUMNS`] order.
    pub fn table_cells(&self) -> Vec<String> {
        TABLE_COLUMNS
            .iter()
            .map(|&n| format!("{:.4}", self.get(n).expect("known metric")))
            .collect()
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "ACC" => self.acc,
            "AUC" => self.auc,
            "F1" => self.f1,
            "SE" => self.se,
            "SP" => self.sp,
            "MCC" => self.mcc,
            "BA" => self.ba,
            "PRAUC" => self.prauc,
            "PPV" => self.ppv,
            "NPV" => self.npv,
            _ => return None,
        })
    }

    /// `(name, value)` pairs in [`METRIC_NAMES`] order.
    pub fn values(&self) -> Vec<(&'static str, f64)> {
        METRIC_NAMES
            .iter()
            .map(|&n| (n, self.get(n).expect("known metric")))
            .collect()
    }
}

fn check(scores: &[f64], labels: &[u8]) -> Result<(usize, usize), MetricsError> {
    if scores.len() != labels.len() {
        return Err(MetricsError::Length {
            scores: scores.len(),
            labels: labels.len(),
        });
    }
    if scores.is_empty() {
        return Err(MetricsError::Empty);
    }
    if let Some(&y) = labels.iter().find(|&&y| y > 1) {
        return Err(MetricsError::Label(y));
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(MetricsError::Score(i));
    }
    let pos = labels.iter().filter(|&&y| y == 1).count();
    Ok((pos, labels.len() - pos))
}

/// Indices sorted by descending score, with tied runs as `(start, end)`.
fn tie_groups(scores: &[f64]) -> (Vec<usize>, Vec<(usize, usize)>) {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut groups = Vec::new();
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        groups.push((start, end));
        start = end;
    }
    (order, groups)
}

/// ROC AUC as the Mann-Whitney statistic with average ranks for ties.
pub fn roc_auc(scores: &[f64], labels: &[u8]) -> Result<f64, MetricsError> {
    let (pos, neg) = check(scores, labels)?;
    if pos == 0 || neg == 0 {
        return Err(MetricsError::SingleClass);
    }
    let (order, groups) = tie_groups(scores);
    let n = scores.len();
    // Ascending ranks: position k in descending order has rank n - k.
    let mut rank_sum = 0.0;
    for (start, end) in groups {
        let avg_rank = (2 * n - start - end + 1) as f64 / 2.0;
        let positives = order[start..end].iter().filter(|&&i| labels[i] == 1).count();
        rank_sum += avg_rank * positives as f64;
    }
    let (p, q) = (pos as f64, neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * q))
}

/// Area under the precision-recall curve as step-wise average precision:
/// `sum_k (R_k - R_{k-1}) P_k` over descending distinct thresholds.
pub fn pr_auc(scores: &[f64], labels: &[u8]) -> Result<f64, MetricsError> {
    let (pos, neg) = check(scores, labels)?;
    if pos == 0 || neg == 0 {
        return Err(MetricsError::SingleClass);
    }
    let (order, groups) = tie_groups(scores);
    let (mut tp, mut seen, mut prev_recall, mut area) = (0usize, 0usize, 0.0, 0.0);
    for (start, end) in groups {
        tp += order[start..end].iter().filter(|&&i| labels[i] == 1).count();
        seen += end - start;
        let recall = tp as f64 / pos as f64;
        let precision = tp as f64 / seen as f64;
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    Ok(area)
}

/// All ten metrics. Scores at or above `threshold` count as positive.
pub fn evaluate(scores: &[f64], labels: &[u8], threshold: f64) -> Result<MetricsReport, MetricsError> {
    let auc = roc_auc(scores, labels)?;
    let prauc = pr_auc(scores, labels)?;
    let counts = ConfusionCounts::from_scores(scores, labels, threshold);
    let m = CountMetrics::from_counts(&counts);
    Ok(MetricsReport {
        acc: m.acc,
        auc,
        f1: m.f1,
        se: m.se,
        sp: m.sp,
        mcc: m.mcc,
        ba: m.ba,
        prauc,
        ppv: m.ppv,
        npv: m.npv,
        counts,
        threshold,
        zero_denominator: m.zero_denominator,
    })
}

/// Mean and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        MeanStd {
            mean,
            std: var.sqrt(),
        }
    }
}

impl std::fmt::Display for MeanStd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.4} ± {:.4}", self.mean, self.std)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_counts() {
        let c = ConfusionCounts {
            tp: 3,
            fn_: 1,
            fp: 1,
            tn: 5,
        };
        let m = CountMetrics::from_counts(&c);
        assert_eq!(m.acc, 0.8);
        assert_eq!(m.se, 0.75);
        assert!((m.sp - 5.0 / 6.0).abs() < 1e-15);
        assert_eq!(m.f1, 0.75);
        assert!((m.mcc - 14.0 / 24.0).abs() < 1e-15);
        assert!((m.ba - 0.791_666_666_666_666_6).abs() < 1e-15);
        assert_eq!(m.ppv, 0.75);
        assert!(m.zero_denominator.is_empty());
    }

    #[test]
    fn all_negative_predictor() {
        let r = evaluate(&[0.1, 0.2, 0.3, 0.4], &[1, 0, 0, 0], 0.5).unwrap();
        assert_eq!((r.se, r.sp, r.ba, r.mcc), (0.0, 1.0, 0.5, 0.0));
        assert!(r.zero_denominator.contains(&"MCC".to_string()));
        assert!(r.zero_denominator.contains(&"PPV".to_string()));
    }

    #[test]
    fn perfect_and_single_class() {
        let r = evaluate(&[0.9, 0.8, 0.1], &[1, 1, 0], 0.5).unwrap();
        assert_eq!((r.acc, r.auc, r.f1, r.mcc, r.ba, r.prauc), (1.0, 1.0, 1.0, 1.0, 1.0, 1.0));
        assert_eq!(evaluate(&[0.2, 0.3], &[1, 1], 0.5), Err(MetricsError::SingleClass));
    }

    #[test]
    fn ties_count_half() {
        assert_eq!(roc_auc(&[0.5, 0.5], &[1, 0]).unwrap(), 0.5);
        assert_eq!(pr_auc(&[0.5, 0.5], &[1, 0]).unwrap(), 0.5);
    }

    #[test]
    fn mean_std_format() {
        let s = MeanStd::of(&[1.0, 3.0]);
        assert_eq!((s.mean, s.std), (2.0, 1.0));
        assert_eq!(s.to_string(), "2.0000 ± 1.0000");
    }
}
