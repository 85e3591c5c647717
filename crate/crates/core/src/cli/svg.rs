//! Line plot of a radius profile; capped stretches are dashed.

use std::fmt::Write;

use crate::pw_affine::RadiusProfile;
use crate::rational::{fmt_q, q, to_decimal, Q};

const WIDTH: i64 = 640;
const HEIGHT: i64 = 400;
const MARGIN: i64 = 40;
const PLACES: u32 = 6;

pub fn render(p: &RadiusProfile) -> String {
    let mut xs: Vec<Q> = vec![p.lo().clone()];
    xs.extend(p.cuts().iter().cloned());
    xs.push(p.hi().clone());
    let values: Vec<Q> = p.f().iter().flat_map(|g| xs.iter().map(|x| g.eval(x))).collect();
    let mut ymin = values.iter().min().cloned().unwrap_or_else(|| q(0));
    let mut ymax = values.iter().max().cloned().unwrap_or_else(|| q(1));
    if ymin == ymax {
        ymin -= q(1);
        ymax += q(1);
    }
    let (w, h, m) = (q(WIDTH - 2 * MARGIN), q(HEIGHT - 2 * MARGIN), q(MARGIN));
    let (lo, hi) = (p.lo().clone(), p.hi().clone());
    let px = |x: &Q| to_decimal(&(&m + (x - &lo) / (&hi - &lo) * &w), PLACES);
    let py = |y: &Q| to_decimal(&(&m + (&ymax - y) / (&ymax - &ymin) * &h), PLACES);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2 * MARGIN,
        HEIGHT - 2 * MARGIN
    );
    let _ = writeln!(out, r#"<text x="{MARGIN}" y="{}" font-size="12">r = {}</text>"#, HEIGHT - 12, fmt_q(&lo));
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="end">r = {}</text>"#,
        WIDTH - MARGIN,
        HEIGHT - 12,
        fmt_q(&hi)
    );
    let _ = writeln!(out, r#"<text x="4" y="{}" font-size="12">{}</text>"#, MARGIN - 8, fmt_q(&ymax));
    let _ = writeln!(out, r#"<text x="4" y="{}" font-size="12">{}</text>"#, HEIGHT - MARGIN + 16, fmt_q(&ymin));
    for (i, g) in p.f().iter().enumerate() {
        for (ci, (a, b)) in p.cells().iter().enumerate() {
            let dash = if p.is_capped(ci, i) { r#" stroke-dasharray="4 3""# } else { "" };
            let _ = writeln!(
                out,
                r#"<line class="f{}" x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"{dash}/>"#,
                i + 1,
                px(a),
                py(&g.eval(a)),
                px(b),
                py(&g.eval(b))
            );
        }
    }
    out.push_str("</svg>\n");
    out
}
