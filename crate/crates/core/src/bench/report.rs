use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{CurveResult, MethodTally, PointResult};
use crate::dictionary::io::write_atomic;
use crate::error::Result;

pub const CSV_HEADER: &str = "method,k,m,cs_ratio,trials,successes,probability,errors,skipped";

fn csv_row(out: &mut String, method: &str, p: &PointResult, t: &MethodTally) {
    let prob = t.probability().map_or_else(|| "nan".to_string(), |v| format!("{v:.6}"));
    let _ = writeln!(
        out,
        "{method},{},{},{:.6},{},{},{prob},{},{}",
        p.k, p.m, p.cs_ratio, t.trials_run, t.successes, t.errors, p.skipped
    );
}

/// Results table; carries no timing so equal configurations give equal bytes.
pub fn curve_csv(result: &CurveResult) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for p in &result.points {
        csv_row(&mut out, "ours", p, &p.ours);
        csv_row(&mut out, "benchmark", p, &p.benchmark);
    }
    out
}

pub fn write_csv(path: impl AsRef<Path>, result: &CurveResult) -> Result<()> {
    write_atomic(path.as_ref(), curve_csv(result).as_bytes())
}

const W: f64 = 480.0;
const H: f64 = 360.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;

/// Probability-versus-ratio plot for sparsity `k`.
pub fn curve_svg(result: &CurveResult, k: usize) -> String {
    let pts: Vec<&PointResult> = result.points.iter().filter(|p| p.k == k).collect();
    let x_max = result.config.l as f64 / result.config.n as f64;
    let px = |r: f64| LEFT + (W - LEFT - RIGHT) * r / x_max;
    let py = |p: f64| TOP + (H - TOP - BOTTOM) * (1.0 - p);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="18" text-anchor="middle">k = {k}, {} / {}</text>"#,
        W / 2.0,
        result.config.ensemble_kind.name(),
        result.config.factor_method.name()
    );
    let (x0, x1, y0, y1) = (px(0.0), px(x_max), py(0.0), py(1.0));
    let _ = writeln!(
        s,
        r#"<path d="M{x0:.1},{y1:.1} V{y0:.1} H{x1:.1}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let p = i as f64 / 4.0;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{p:.2}</text>"#,
            x0 - 6.0,
            py(p) + 4.0
        );
        let r = x_max * p;
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{:.1}%</text>"#,
            px(r),
            y0 + 16.0,
            100.0 * r
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">CS ratio</text>"#,
        (x0 + x1) / 2.0,
        H - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">recovery probability</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
    let series: [(&str, &str, &str, fn(&PointResult) -> &MethodTally); 2] = [
        ("ours", "#c0392b", "", |p| &p.ours),
        ("benchmark", "#2c3e50", r#" stroke-dasharray="6 4""#, |p| &p.benchmark),
    ];
    for (i, (name, colour, dash, pick)) in series.iter().enumerate() {
        let coords: Vec<String> = pts
            .iter()
            .filter_map(|p| {
                pick(p)
                    .probability()
                    .map(|v| format!("{:.1},{:.1}", px(p.cs_ratio), py(v)))
            })
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="2"{dash}/>"#,
            coords.join(" ")
        );
        let ly = TOP + 14.0 + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{colour}" stroke-width="2"{dash}/><text x="{:.1}" y="{:.1}">{name}</text>"#,
            x1 - 110.0,
            x1 - 80.0,
            x1 - 74.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Output path per `k`: `base` itself for a single `k`, otherwise
/// `<stem>-k<k>.<ext>` beside it.
pub fn svg_paths(base: &Path, ks: &[usize]) -> Vec<(usize, PathBuf)> {
    if ks.len() == 1 {
        return vec![(ks[0], base.to_path_buf())];
    }
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let ext = base
        .extension()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "svg".into());
    ks.iter()
        .map(|&k| (k, base.with_file_name(format!("{stem}-k{k}.{ext}"))))
        .collect()
}

pub fn write_svgs(result: &CurveResult, base: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (k, path) in svg_paths(base, &result.config.k_list) {
        write_atomic(&path, curve_svg(result, k).as_bytes())?;
        written.push(path);
    }
    Ok(written)
}
