//! Text and SVG dumps of strips.
//!
//! Text format: a header, one line `level s b t h` per brick, then the
//! edges with doubled abscissae (node `x` ↦ `2x+1`, vertex `v` ↦ `2v`):
//! `P level 2x+1 2y+1` for a primal edge from level `level` up, and
//! `D level 2v 2u` for a dual edge from level `level` down.

use super::StripForest;
use crate::error::Result;
use std::fmt::Write as _;
use std::ops::Range;

impl StripForest {
    /// Bricks of row `k` meeting nodes `window` on their bottom or top.
    fn bricks_near(&self, k: usize, window: &Range<i64>) -> Vec<crate::row_flow::Brick> {
        self.row(k)
            .bricks()
            .filter(|br| {
                (br.s < window.end && br.bottom_end() > window.start) || (br.t < window.end && br.top_end() > window.start)
            })
            .collect()
    }

    pub fn export_text(&self, window: Range<i64>) -> Result<String> {
        let mut out = String::new();
        writeln!(out, "# law {}", self.law()).ok();
        writeln!(out, "# height {} window {} {}", self.height(), window.start, window.end).ok();
        writeln!(out, "# level s b t h").ok();
        for k in 0..self.height() {
            for br in self.bricks_near(k, &window) {
                writeln!(out, "{k} {} {} {} {}", br.s, br.b, br.t, br.h).ok();
            }
        }
        writeln!(out, "# edges").ok();
        for k in 0..self.height() {
            for br in self.bricks_near(k, &window) {
                let x = br.bottom_right();
                for y in br.t..br.top_end() {
                    writeln!(out, "P {k} {} {}", 2 * x + 1, 2 * y + 1).ok();
                }
                for u in br.s..br.bottom_end() {
                    writeln!(out, "D {} {} {}", k + 1, 2 * br.t, 2 * u).ok();
                }
            }
        }
        Ok(out)
    }

    /// Drawing in the style of the usual brick-wall figures: bricks as
    /// trapezoids, primal edges in blue, dual edges in red.
    pub fn export_svg(&self, window: Range<i64>) -> Result<String> {
        let scale = 24.0;
        let r = self.height() as f64;
        let width = (window.end - window.start) as f64 + 2.0;
        let px = |x: f64| (x - window.start as f64 + 1.0) * scale;
        let py = |level: f64| (r - level + 0.5) * scale;
        let mut out = String::new();
        writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
            width * scale,
            (r + 1.0) * scale,
            width * scale,
            (r + 1.0) * scale
        )
        .ok();
        for k in 0..self.height() {
            let kf = k as f64;
            for br in self.bricks_near(k, &window) {
                writeln!(
                    out,
                    r##"<polygon points="{:.1},{:.1} {:.1},{:.1} {:.1},{:.1} {:.1},{:.1}" fill="#f4efe6" stroke="#888" stroke-width="1"/>"##,
                    px(br.s as f64), py(kf), px(br.bottom_end() as f64), py(kf),
                    px(br.top_end() as f64), py(kf + 1.0), px(br.t as f64), py(kf + 1.0)
                )
                .ok();
                let x = br.bottom_right() as f64 + 0.5;
                for y in br.t..br.top_end() {
                    writeln!(
                        out,
                        r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#1f5fbf" stroke-width="2"/>"##,
                        px(x),
                        py(kf),
                        px(y as f64 + 0.5),
                        py(kf + 1.0)
                    )
                    .ok();
                }
                for u in br.s..br.bottom_end() {
                    writeln!(
                        out,
                        r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#c0392b" stroke-width="1" stroke-dasharray="3,2"/>"##,
                        px(br.t as f64), py(kf + 1.0), px(u as f64), py(kf)
                    )
                    .ok();
                }
            }
        }
        writeln!(out, "</svg>").ok();
        Ok(out)
    }
}
