use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{PairSummary, TimeKind, PERCENTILE_CONVENTION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub solver: String,
    pub time_kind: TimeKind,
    /// `None` when no run converged; such bars are drawn as a label only.
    pub median_ns: Option<f64>,
    pub p25_ns: Option<f64>,
    pub p75_ns: Option<f64>,
    pub n_converged: usize,
    pub n_runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartGroup {
    pub problem: String,
    pub bars: Vec<Bar>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartData {
    pub percentile_convention: String,
    pub error_bars: String,
    pub groups: Vec<ChartGroup>,
}

/// One group per problem, bars in the order the summaries list solvers.
pub fn chart_data(summaries: &[PairSummary]) -> ChartData {
    let mut groups: Vec<ChartGroup> = Vec::new();
    for s in summaries {
        let bar = Bar {
            solver: s.solver.clone(),
            time_kind: s.time_kind,
            median_ns: s.stats.map(|t| t.median_ns),
            p25_ns: s.stats.map(|t| t.p25_ns),
            p75_ns: s.stats.map(|t| t.p75_ns),
            n_converged: s.n_converged,
            n_runs: s.n_runs,
        };
        match groups.iter_mut().find(|g| g.problem == s.problem) {
            Some(g) => g.bars.push(bar),
            None => groups.push(ChartGroup {
                problem: s.problem.clone(),
                bars: vec![bar],
            }),
        }
    }
    ChartData {
        percentile_convention: PERCENTILE_CONVENTION.into(),
        error_bars: "p25 to p75 of converged runs".into(),
        groups,
    }
}

const PANEL_H: f64 = 260.0;
const TOP: f64 = 40.0;
const LEFT: f64 = 70.0;
const BAR_W: f64 = 46.0;
const SLOT_W: f64 = 90.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Static grouped bar chart, one panel per problem, log-scaled time axis.
/// Roundtrip-model bars are hatched to set them apart from wall-clock bars.
pub fn render_svg(chart: &ChartData) -> String {
    let slots = chart.groups.iter().map(|g| g.bars.len()).max().unwrap_or(1).max(1);
    let width = LEFT + SLOT_W * slots as f64 + 30.0;
    let panel_total = PANEL_H + TOP + 50.0;
    let height = panel_total * chart.groups.len().max(1) as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    svg.push_str(
        r##"<defs><pattern id="hatch" width="6" height="6" patternUnits="userSpaceOnUse" patternTransform="rotate(45)"><rect width="6" height="6" fill="#f2c48d"/><line x1="0" y1="0" x2="0" y2="6" stroke="#c0712b" stroke-width="2"/></pattern></defs>
"##,
    );
    for (gi, group) in chart.groups.iter().enumerate() {
        let y0 = gi as f64 * panel_total + TOP;
        let values: Vec<f64> = group
            .bars
            .iter()
            .flat_map(|b| [b.p25_ns, b.median_ns, b.p75_ns])
            .flatten()
            .map(|v| v.max(1.0))
            .collect();
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(0.0, f64::max);
        let (dmin, dmax) = if values.is_empty() {
            (0.0, 1.0)
        } else {
            let dmin = lo.log10().floor();
            (dmin, hi.log10().ceil().max(dmin + 1.0))
        };
        let y_of = |v: f64| y0 + PANEL_H * (1.0 - (v.max(1.0).log10() - dmin) / (dmax - dmin));

        let _ = writeln!(
            svg,
            r#"<text x="{LEFT}" y="{:.1}" font-size="13" font-weight="bold">{}</text>"#,
            y0 - 14.0,
            escape(&group.problem)
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{y0}" x2="{LEFT}" y2="{:.1}" stroke="#333"/>"##,
            y0 + PANEL_H
        );
        for d in dmin as i32..=dmax as i32 {
            let y = y_of(10f64.powi(d));
            let _ = writeln!(
                svg,
                r##"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">1e{d} ns</text>"##,
                LEFT,
                width - 20.0,
                LEFT - 6.0,
                y + 4.0
            );
        }
        for (bi, bar) in group.bars.iter().enumerate() {
            let cx = LEFT + SLOT_W * (bi as f64 + 0.5);
            let base = y0 + PANEL_H;
            if let (Some(m), Some(p25), Some(p75)) = (bar.median_ns, bar.p25_ns, bar.p75_ns) {
                let top = y_of(m);
                let fill = match bar.time_kind {
                    TimeKind::WallClockApply => "#6a9fd8",
                    TimeKind::RoundtripModel => "url(#hatch)",
                };
                let _ = writeln!(
                    svg,
                    r##"<rect x="{:.1}" y="{top:.1}" width="{BAR_W}" height="{:.1}" fill="{fill}" stroke="#333"><title>{}: median {m} ns, p25 {p25} ns, p75 {p75} ns</title></rect>"##,
                    cx - BAR_W / 2.0,
                    (base - top).max(0.0),
                    escape(&bar.solver)
                );
                let (ya, yb) = (y_of(p25), y_of(p75));
                let _ = writeln!(
                    svg,
                    r##"<line x1="{cx:.1}" y1="{ya:.1}" x2="{cx:.1}" y2="{yb:.1}" stroke="#000"/><line x1="{:.1}" y1="{ya:.1}" x2="{:.1}" y2="{ya:.1}" stroke="#000"/><line x1="{:.1}" y1="{yb:.1}" x2="{:.1}" y2="{yb:.1}" stroke="#000"/>"##,
                    cx - 8.0,
                    cx + 8.0,
                    cx - 8.0,
                    cx + 8.0
                );
            } else {
                let _ = writeln!(
                    svg,
                    r#"<text x="{cx:.1}" y="{:.1}" text-anchor="middle">no convergence</text>"#,
                    base - 6.0
                );
            }
            let _ = writeln!(
                svg,
                r##"<text x="{cx:.1}" y="{:.1}" text-anchor="middle">{}</text><text x="{cx:.1}" y="{:.1}" text-anchor="middle" fill="#666">{}/{}</text>"##,
                base + 16.0,
                escape(&bar.solver),
                base + 30.0,
                bar.n_converged,
                bar.n_runs
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}
