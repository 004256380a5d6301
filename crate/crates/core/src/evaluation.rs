//! Result records, average ranks, the Friedman test with Nemenyi critical
//! differences, clique grouping and the diagrams built from them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

pub const RECORD_HEADER: [&str; 6] = ["dataset", "pipeline", "resample", "accuracy", "selected_spec", "seconds"];

/// One scored (dataset, pipeline, resample) task.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultRecord {
    pub dataset: String,
    pub pipeline: String,
    pub resample: u64,
    pub correct: usize,
    pub total: usize,
    /// Smoother actually applied; for tuned arms, the selection.
    pub selected_spec: Option<String>,
    pub seconds: Option<f64>,
}

impl ResultRecord {
    pub fn accuracy(&self) -> f64 {
        self.correct as f64 / self.total as f64
    }

    /// `c/t=0.xxxxxxxxx`: the exact ratio and its 9-decimal rendering.
    pub fn accuracy_field(&self) -> String {
        format!("{}/{}={:.9}", self.correct, self.total, self.accuracy())
    }

    fn sort_key(&self) -> (&str, &str, u64) {
        (&self.dataset, &self.pipeline, self.resample)
    }

    fn to_row(&self) -> [String; 6] {
        [
            self.dataset.clone(),
            self.pipeline.clone(),
            self.resample.to_string(),
            self.accuracy_field(),
            self.selected_spec.clone().unwrap_or_else(|| "-".into()),
            self.seconds.map_or_else(|| "-".into(), |s| format!("{s:.3}")),
        ]
    }

    fn from_row(row: &csv::StringRecord, line: usize, origin: &str) -> Result<Self> {
        let parse_err = |token: &str| Error::Parse {
            path: origin.into(),
            line,
            token: token.into(),
        };
        if row.len() != RECORD_HEADER.len() {
            return Err(Error::Format {
                path: origin.into(),
                line,
                message: format!("expected {} fields, found {}", RECORD_HEADER.len(), row.len()),
            });
        }
        let resample = row[2].parse().map_err(|_| parse_err(&row[2]))?;
        let ratio = row[3].split('=').next().unwrap_or("");
        let (c, t) = ratio.split_once('/').ok_or_else(|| parse_err(&row[3]))?;
        let correct: usize = c.parse().map_err(|_| parse_err(&row[3]))?;
        let total: usize = t.parse().map_err(|_| parse_err(&row[3]))?;
        if total == 0 || correct > total {
            return Err(parse_err(&row[3]));
        }
        let opt = |s: &str| (s != "-").then(|| s.to_string());
        let seconds = match &row[5] {
            "-" => None,
            s => Some(s.parse().map_err(|_| parse_err(s))?),
        };
        Ok(ResultRecord {
            dataset: row[0].to_string(),
            pipeline: row[1].to_string(),
            resample,
            correct,
            total,
            selected_spec: opt(&row[4]),
            seconds,
        })
    }
}

/// Sort records into canonical (dataset, pipeline, resample) order.
pub fn sort_records(records: &mut [ResultRecord]) {
    records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

pub fn records_to_csv(records: &[ResultRecord]) -> Result<String> {
    let mut sorted = records.to_vec();
    sort_records(&mut sorted);
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Validation(format!("csv encoding failed: {e}"));
    w.write_record(RECORD_HEADER).map_err(io)?;
    for r in &sorted {
        w.write_record(r.to_row()).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Validation(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 fields"))
}

pub fn records_from_csv(text: &str, origin: &str) -> Result<Vec<ResultRecord>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let header = r.headers().map_err(|e| Error::Format {
        path: origin.into(),
        line: 1,
        message: e.to_string(),
    })?;
    if header.iter().ne(RECORD_HEADER) {
        return Err(Error::Format {
            path: origin.into(),
            line: 1,
            message: format!("expected header {}", RECORD_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, row) in r.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::Format {
            path: origin.into(),
            line,
            message: e.to_string(),
        })?;
        out.push(ResultRecord::from_row(&row, line, origin)?);
    }
    Ok(out)
}

pub fn write_records(path: &Path, records: &[ResultRecord]) -> Result<()> {
    std::fs::write(path, records_to_csv(records)?).map_err(|e| Error::io(path, e))
}

pub fn read_records(path: &Path) -> Result<Vec<ResultRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    records_from_csv(&text, &path.display().to_string())
}

/// Mean accuracy over resamples per (dataset, pipeline).
#[derive(Clone, Debug, PartialEq)]
pub struct AccuracyMatrix {
    pub datasets: Vec<String>,
    pub pipelines: Vec<String>,
    /// `values[d][p]`; `None` where no record exists.
    pub values: Vec<Vec<Option<f64>>>,
}

impl AccuracyMatrix {
    /// Build from records, keeping `pipelines` in the given order.
    pub fn from_records(records: &[ResultRecord], pipelines: &[String]) -> Self {
        let datasets: Vec<String> = records
            .iter()
            .filter(|r| pipelines.contains(&r.pipeline))
            .map(|r| r.dataset.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        // summation in canonical order keeps the means independent of input order
        let mut sorted: Vec<&ResultRecord> = records.iter().collect();
        sorted.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
        let mut sums: BTreeMap<(&str, &str), (f64, usize)> = BTreeMap::new();
        for r in sorted {
            let e = sums.entry((&r.dataset, &r.pipeline)).or_insert((0.0, 0));
            e.0 += r.accuracy();
            e.1 += 1;
        }
        let values = datasets
            .iter()
            .map(|d| {
                pipelines
                    .iter()
                    .map(|p| sums.get(&(d.as_str(), p.as_str())).map(|(s, n)| s / *n as f64))
                    .collect()
            })
            .collect();
        AccuracyMatrix {
            datasets,
            pipelines: pipelines.to_vec(),
            values,
        }
    }

    pub fn from_rows(datasets: Vec<String>, pipelines: Vec<String>, rows: Vec<Vec<f64>>) -> Self {
        let values = rows.into_iter().map(|r| r.into_iter().map(Some).collect()).collect();
        AccuracyMatrix {
            datasets,
            pipelines,
            values,
        }
    }

    /// `(dataset, pipeline)` pairs without a value.
    pub fn missing_cells(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (d, row) in self.datasets.iter().zip(&self.values) {
            for (p, v) in self.pipelines.iter().zip(row) {
                if v.is_none() {
                    out.push((d.clone(), p.clone()));
                }
            }
        }
        out
    }
}

/// Fractional ranks of one row: rank 1 for the highest value, tied values
/// share the mean of their positions.
pub fn rank_row(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = r;
        }
        i = j + 1;
    }
    ranks
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankSummary {
    pub datasets: Vec<String>,
    pub pipelines: Vec<String>,
    pub ranks: Vec<Vec<f64>>,
    pub average: Vec<f64>,
}

impl RankSummary {
    pub fn n_datasets(&self) -> usize {
        self.datasets.len()
    }

    pub fn k(&self) -> usize {
        self.pipelines.len()
    }
}

pub fn average_ranks(matrix: &AccuracyMatrix) -> Result<RankSummary> {
    if let Some((d, p)) = matrix.missing_cells().into_iter().next() {
        return Err(Error::Validation(format!("no result for dataset `{d}`, pipeline `{p}`")));
    }
    let ranks: Vec<Vec<f64>> = matrix
        .values
        .iter()
        .map(|row| rank_row(&row.iter().map(|v| v.expect("checked")).collect::<Vec<_>>()))
        .collect();
    let k = matrix.pipelines.len();
    let n = ranks.len();
    let average = (0..k)
        .map(|p| ranks.iter().map(|r| r[p]).sum::<f64>() / n as f64)
        .collect();
    Ok(RankSummary {
        datasets: matrix.datasets.clone(),
        pipelines: matrix.pipelines.clone(),
        ranks,
        average,
    })
}

pub const TABULATED_ALPHAS: [f64; 3] = [0.01, 0.05, 0.1];

// Studentized range quantiles at infinite degrees of freedom divided by
// sqrt(2), for k = 2..=20.
const Q_001: [f64; 19] = [
    2.575829, 2.913494, 3.113250, 3.254686, 3.363740, 3.452213, 3.526471, 3.590339, 3.646292, 3.696021,
    3.740733, 3.781318, 3.818451, 3.852654, 3.884343, 3.913850, 3.941446, 3.967357, 3.991770,
];
const Q_005: [f64; 19] = [
    1.959964, 2.343701, 2.569032, 2.727774, 2.849705, 2.948320, 3.030878, 3.101730, 3.163684, 3.218654,
    3.268004, 3.312739, 3.353618, 3.391230, 3.426041, 3.458425, 3.488685, 3.517073, 3.543799,
];
const Q_010: [f64; 19] = [
    1.644854, 2.052293, 2.291341, 2.459516, 2.588521, 2.692732, 2.779884, 2.854606, 2.919889, 2.977768,
    3.029694, 3.076733, 3.119693, 3.159199, 3.195743, 3.229723, 3.261461, 3.291224, 3.319233,
];

/// Nemenyi critical value `q_alpha` for `k` groups.
pub fn nemenyi_q(alpha: f64, k: usize) -> Result<f64> {
    let table = if (alpha - 0.01).abs() < 1e-12 {
        &Q_001
    } else if (alpha - 0.05).abs() < 1e-12 {
        &Q_005
    } else if (alpha - 0.1).abs() < 1e-12 {
        &Q_010
    } else {
        return Err(Error::Config(format!("alpha {alpha} is not tabulated (use 0.01, 0.05 or 0.1)")));
    };
    if !(2..=20).contains(&k) {
        return Err(Error::Config(format!("Nemenyi constants cover 2..=20 pipelines, got {k}")));
    }
    Ok(table[k - 2])
}

/// Critical difference `q_alpha * sqrt(k (k + 1) / (6 N))`.
pub fn critical_difference(alpha: f64, k: usize, n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::Validation("critical difference needs at least one dataset".into()));
    }
    Ok(nemenyi_q(alpha, k)? * ((k * (k + 1)) as f64 / (6.0 * n as f64)).sqrt())
}

pub fn friedman_statistic(summary: &RankSummary) -> f64 {
    let k = summary.k() as f64;
    let n = summary.n_datasets() as f64;
    let sum_sq: f64 = summary.average.iter().map(|r| r * r).sum();
    12.0 * n / (k * (k + 1.0)) * (sum_sq - k * (k + 1.0) * (k + 1.0) / 4.0)
}

/// Friedman statistic and Nemenyi critical difference.
pub fn friedman_nemenyi(summary: &RankSummary, alpha: f64) -> Result<(f64, f64)> {
    if summary.n_datasets() < 2 || summary.k() < 2 {
        return Err(Error::Validation(format!(
            "significance test needs at least 2 datasets and 2 pipelines, got {} and {}",
            summary.n_datasets(),
            summary.k()
        )));
    }
    let cd = critical_difference(alpha, summary.k(), summary.n_datasets())?;
    Ok((friedman_statistic(summary), cd))
}

/// Maximal groups of pipelines whose average ranks lie within `cd` of each
/// other. Each group lists indices in increasing rank order.
pub fn cliques(average: &[f64], cd: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..average.len()).collect();
    order.sort_by(|&a, &b| average[a].total_cmp(&average[b]).then(a.cmp(&b)));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        let lo = average[i];
        let start = order.iter().position(|&j| average[j] == lo).unwrap_or(pos);
        let group: Vec<usize> = order[start..]
            .iter()
            .copied()
            .take_while(|&j| average[j] <= lo + cd)
            .collect();
        if !groups.iter().any(|g| group.iter().all(|x| g.contains(x))) {
            groups.push(group);
        }
    }
    groups
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// A rendered critical difference diagram and its plain-text twin.
#[derive(Clone, Debug, PartialEq)]
pub struct CdDiagram {
    pub svg: String,
    pub text: String,
}

pub fn render_cd_diagram(summary: &RankSummary, alpha: f64, title: &str) -> Result<CdDiagram> {
    let k = summary.k();
    let (stat, cd, groups) = if k >= 2 && summary.n_datasets() >= 2 {
        let (s, cd) = friedman_nemenyi(summary, alpha)?;
        (Some(s), Some(cd), cliques(&summary.average, cd))
    } else {
        (None, None, Vec::new())
    };
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| summary.average[a].total_cmp(&summary.average[b]).then(a.cmp(&b)));

    let width = 800.0;
    let margin = 200.0;
    let axis_y = 90.0;
    let span = width - 2.0 * margin;
    let x = |r: f64| {
        if k <= 1 {
            width / 2.0
        } else {
            margin + (r - 1.0) / (k as f64 - 1.0) * span
        }
    };
    let label_rows = k.div_ceil(2);
    let bars_bottom = axis_y + 20.0 + 10.0 * groups.len() as f64;
    let height = bars_bottom + 20.0 + 20.0 * label_rows as f64 + 20.0;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="monospace" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.1}" y="20" text-anchor="middle">{}</text>"#, width / 2.0, esc(title));
    let _ = writeln!(
        s,
        r#"<line class="axis" x1="{:.1}" y1="{axis_y:.1}" x2="{:.1}" y2="{axis_y:.1}" stroke="black"/>"#,
        x(1.0),
        x(k.max(1) as f64)
    );
    for t in 1..=k.max(1) {
        let tx = x(t as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{tx:.1}" y1="{:.1}" x2="{tx:.1}" y2="{axis_y:.1}" stroke="black"/><text x="{tx:.1}" y="{:.1}" text-anchor="middle">{t}</text>"#,
            axis_y - 5.0,
            axis_y - 9.0
        );
    }
    if let Some(cd) = cd {
        let y = 45.0;
        let _ = writeln!(
            s,
            r#"<line class="cd" x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="black" stroke-width="2"/>"#,
            x(1.0),
            x(1.0 + cd)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}">CD = {cd:.4} (Nemenyi, alpha = {alpha})</text>"#,
            x(1.0 + cd) + 6.0,
            y + 4.0
        );
    }
    for (g, members) in groups.iter().enumerate() {
        let lo = summary.average[members[0]];
        let hi = summary.average[*members.last().expect("non-empty clique")];
        let y = axis_y + 20.0 + 10.0 * g as f64;
        let _ = writeln!(
            s,
            r#"<line class="clique" x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="black" stroke-width="4"/>"#,
            x(lo) - 4.0,
            x(hi) + 4.0
        );
    }
    for (pos, &p) in order.iter().enumerate() {
        let r = summary.average[p];
        let left = pos < label_rows;
        let row = if left { pos } else { k - 1 - pos };
        let ly = bars_bottom + 20.0 + 20.0 * row as f64;
        let (lx, anchor) = if left { (margin - 10.0, "end") } else { (width - margin + 10.0, "start") };
        let _ = writeln!(
            s,
            r#"<polyline class="tick" points="{:.1},{axis_y:.1} {:.1},{ly:.1} {lx:.1},{ly:.1}" fill="none" stroke="black"/>"#,
            x(r),
            x(r)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="{anchor}">{} ({r:.3})</text>"#,
            if left { lx - 4.0 } else { lx + 4.0 },
            ly + 4.0,
            esc(&summary.pipelines[p])
        );
    }
    s.push_str("</svg>\n");

    let mut t = String::new();
    let _ = writeln!(t, "{title}");
    let _ = writeln!(t, "datasets: {}", summary.n_datasets());
    let _ = writeln!(t, "pipelines: {k}");
    match (stat, cd) {
        (Some(stat), Some(cd)) => {
            let _ = writeln!(t, "friedman: {stat:.6}");
            let _ = writeln!(t, "test: Nemenyi, alpha = {alpha}");
            let _ = writeln!(t, "critical difference: {cd:.6}");
        }
        _ => {
            let _ = writeln!(t, "test: not applicable");
        }
    }
    let _ = writeln!(t, "average ranks:");
    for &p in &order {
        let _ = writeln!(t, "  {:.6}  {}", summary.average[p], summary.pipelines[p]);
    }
    let _ = writeln!(t, "cliques:");
    for g in &groups {
        let names: Vec<&str> = g.iter().map(|&i| summary.pipelines[i].as_str()).collect();
        let _ = writeln!(t, "  {{{}}}", names.join(", "));
    }
    Ok(CdDiagram { svg: s, text: t })
}

/// Write `<out_path>` (SVG) and its `.txt` twin next to it.
pub fn emit_cd_diagram(summary: &RankSummary, alpha: f64, title: &str, out_path: &Path) -> Result<()> {
    let d = render_cd_diagram(summary, alpha, title)?;
    std::fs::write(out_path, d.svg).map_err(|e| Error::io(out_path, e))?;
    let twin = out_path.with_extension("txt");
    std::fs::write(&twin, d.text).map_err(|e| Error::io(&twin, e))
}

/// Rank of `reference` among the matrix's pipelines on each dataset, paired
/// with series length: `(dataset, length, rank)`.
pub fn rank_vs_length(
    matrix: &AccuracyMatrix,
    lengths: &BTreeMap<String, usize>,
    reference: &str,
) -> Result<Vec<(String, usize, f64)>> {
    let p = matrix
        .pipelines
        .iter()
        .position(|x| x == reference)
        .ok_or_else(|| Error::Validation(format!("no results for unsmoothed pipeline `{reference}`")))?;
    if matrix.pipelines.len() < 2 {
        return Err(Error::Validation("rank against length needs a smoothed competitor".into()));
    }
    let summary = average_ranks(matrix)?;
    summary
        .datasets
        .iter()
        .zip(&summary.ranks)
        .map(|(d, r)| {
            let m = *lengths
                .get(d)
                .ok_or_else(|| Error::Validation(format!("series length of `{d}` unknown")))?;
            Ok((d.clone(), m, r[p]))
        })
        .collect()
}

pub fn rank_length_table(rows: &[(String, usize, f64)]) -> String {
    let mut s = String::from("dataset,length,rank\n");
    for (d, m, r) in rows {
        let _ = writeln!(s, "{d},{m},{r}");
    }
    s
}

pub fn rank_length_svg(rows: &[(String, usize, f64)], k: usize, title: &str) -> String {
    let (w, h, pad) = (600.0, 400.0, 60.0);
    let lo = rows.iter().map(|r| r.1).min().unwrap_or(0) as f64;
    let hi = rows.iter().map(|r| r.1).max().unwrap_or(1) as f64;
    let x = |m: f64| {
        if hi > lo {
            pad + (m - lo) / (hi - lo) * (w - 2.0 * pad)
        } else {
            w / 2.0
        }
    };
    let kk = k.max(2) as f64;
    let y = |r: f64| pad + (r - 1.0) / (kk - 1.0) * (h - 2.0 * pad);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}" font-family="monospace" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.1}" y="20" text-anchor="middle">{}</text>"#, w / 2.0, esc(title));
    let _ = writeln!(
        s,
        r#"<line x1="{pad:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black"/>"#,
        h - pad + 10.0,
        w - pad,
        h - pad + 10.0
    );
    let _ = writeln!(
        s,
        r#"<line x1="{:.1}" y1="{pad:.1}" x2="{:.1}" y2="{:.1}" stroke="black"/>"#,
        pad - 10.0,
        pad - 10.0,
        h - pad
    );
    for r in 1..=k.max(1) {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{r}</text>"#,
            pad - 14.0,
            y(r as f64) + 4.0
        );
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="start">{lo:.0}</text>"#, pad, h - pad + 26.0);
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{hi:.0}</text>"#, w - pad, h - pad + 26.0);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">series length</text>"#,
        w / 2.0,
        h - 15.0
    );
    let _ = writeln!(s, r#"<text x="15" y="{:.1}" transform="rotate(-90 15 {:.1})" text-anchor="middle">rank</text>"#, h / 2.0, h / 2.0);
    for (d, m, r) in rows {
        let _ = writeln!(
            s,
            r#"<circle class="point" cx="{:.1}" cy="{:.1}" r="4" fill="black"><title>{}</title></circle>"#,
            x(*m as f64),
            y(*r),
            esc(d)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Spearman rank correlation (fractional ranks, Pearson on ranks). `None`
/// when either input has no variation.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let rx = rank_row(xs);
    let ry = rank_row(ys);
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}
