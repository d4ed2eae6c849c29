// SPDX-License-Identifier: Apache-2.0

//! Standalone SVG heatmap of an RWC matrix.

use std::fmt::Write;

use super::rwc::{RwcMatrix, DECILES};

const CELL: usize = 44;
const LEFT: usize = 70;
const TOP: usize = 50;

/// Linear ramp from white (0) to a saturated blue (1).
fn ramp(v: f64) -> String {
    let t = v.clamp(0.0, 1.0);
    let mix = |lo: f64, hi: f64| (lo + (hi - lo) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(255.0, 8.0), mix(255.0, 48.0), mix(255.0, 107.0))
}

/// Start decile runs down the rows, end decile across the columns. Missing
/// entries are drawn grey and labelled `n/a`.
pub fn rwc_heatmap_svg(m: &RwcMatrix, title: &str) -> String {
    let width = LEFT + CELL * DECILES + 20;
    let height = TOP + CELL * DECILES + 50;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif">"##
    );
    let _ = writeln!(s, r##"<rect width="{width}" height="{height}" fill="white"/>"##);
    let _ = writeln!(
        s,
        r##"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"##,
        LEFT + CELL * DECILES / 2,
        escape(title)
    );
    for a in 0..DECILES {
        for b in 0..DECILES {
            let x = LEFT + b * CELL;
            let y = TOP + a * CELL;
            let (fill, label, ink) = match m.values[a][b] {
                Some(v) => (ramp(v), format!("{v:.2}"), if v > 0.55 { "white" } else { "black" }),
                None => ("#bdbdbd".to_string(), "n/a".to_string(), "black"),
            };
            let _ = writeln!(
                s,
                r##"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{fill}" stroke="#ffffff"/>"##
            );
            let _ = writeln!(
                s,
                r##"<text x="{}" y="{}" text-anchor="middle" font-size="11" fill="{ink}">{label}</text>"##,
                x + CELL / 2,
                y + CELL / 2 + 4
            );
        }
    }
    for i in 0..DECILES {
        let _ = writeln!(
            s,
            r##"<text x="{}" y="{}" text-anchor="middle" font-size="12">{}</text>"##,
            LEFT + i * CELL + CELL / 2,
            TOP + DECILES * CELL + 16,
            i + 1
        );
        let _ = writeln!(
            s,
            r##"<text x="{}" y="{}" text-anchor="end" font-size="12">{}</text>"##,
            LEFT - 6,
            TOP + i * CELL + CELL / 2 + 4,
            i + 1
        );
    }
    let _ = writeln!(
        s,
        r##"<text x="{}" y="{}" text-anchor="middle" font-size="13">end decile</text>"##,
        LEFT + CELL * DECILES / 2,
        TOP + DECILES * CELL + 38
    );
    let _ = writeln!(
        s,
        r##"<text x="16" y="{0}" text-anchor="middle" font-size="13" transform="rotate(-90 16 {0})">start decile</text>"##,
        TOP + CELL * DECILES / 2
    );
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
