//! Minimal SVG writer on an integer grid.
//!
//! The view box is `GRID × GRID` units covering a fixed rectangle of the plane,
//! so every coordinate is rounded to `1/GRID` of the viewport.

use std::fmt::Write;

use quadiff::C64;

pub const GRID: f64 = 1e6;

pub struct Canvas {
    x0: f64,
    y1: f64,
    sx: f64,
    sy: f64,
    body: String,
}

#[derive(Debug, Clone, Copy)]
pub enum Stroke {
    Solid,
    Dashed,
}

impl Canvas {
    /// Viewport `[-r, r]²`.
    pub fn square(r: f64) -> Self {
        Self::rect(-r, r, -r, r)
    }

    pub fn rect(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        let mut c = Self { x0, y1, sx: GRID / (x1 - x0), sy: GRID / (y1 - y0), body: String::new() };
        c.axes(x0, x1, y0, y1);
        c
    }

    fn map(&self, z: C64) -> (i64, i64) {
        (((z.re - self.x0) * self.sx).round() as i64, ((self.y1 - z.im) * self.sy).round() as i64)
    }

    fn axes(&mut self, x0: f64, x1: f64, y0: f64, y1: f64) {
        if y0 < 0.0 && y1 > 0.0 {
            self.polyline(&[C64::new(x0, 0.0), C64::new(x1, 0.0)], "#bbbbbb", Stroke::Solid);
        }
        if x0 < 0.0 && x1 > 0.0 {
            self.polyline(&[C64::new(0.0, y0), C64::new(0.0, y1)], "#bbbbbb", Stroke::Solid);
        }
    }

    pub fn polyline(&mut self, pts: &[C64], color: &str, stroke: Stroke) {
        if pts.len() < 2 {
            return;
        }
        let mut d = String::new();
        let mut last = None;
        for &z in pts {
            let p = self.map(z);
            if last == Some(p) {
                continue;
            }
            if !d.is_empty() {
                d.push(' ');
            }
            let _ = write!(d, "{},{}", p.0, p.1);
            last = Some(p);
        }
        let dash = match stroke {
            Stroke::Solid => "",
            Stroke::Dashed => " stroke-dasharray=\"8000 6000\"",
        };
        let _ = writeln!(
            self.body,
            "<polyline points=\"{d}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2500\"{dash}/>"
        );
    }

    pub fn dot(&mut self, z: C64, radius: i64, color: &str) {
        let (x, y) = self.map(z);
        let _ = writeln!(self.body, "<circle cx=\"{x}\" cy=\"{y}\" r=\"{radius}\" fill=\"{color}\"/>");
    }

    pub fn cross(&mut self, z: C64, half: i64, color: &str) {
        let (x, y) = self.map(z);
        let _ = writeln!(
            self.body,
            "<path d=\"M{},{} L{},{} M{},{} L{},{}\" stroke=\"{color}\" stroke-width=\"3000\"/>",
            x - half,
            y - half,
            x + half,
            y + half,
            x - half,
            y + half,
            x + half,
            y - half
        );
    }

    /// Axis-aligned cell centered at `z` with half-widths in plane units.
    pub fn cell(&mut self, z: C64, hw: f64, hh: f64, color: &str) {
        let (xa, ya) = self.map(C64::new(z.re - hw, z.im + hh));
        let (xb, yb) = self.map(C64::new(z.re + hw, z.im - hh));
        let _ = writeln!(
            self.body,
            "<rect x=\"{xa}\" y=\"{ya}\" width=\"{}\" height=\"{}\" fill=\"{color}\"/>",
            xb - xa,
            yb - ya
        );
    }

    pub fn finish(self) -> String {
        let g = GRID as i64;
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {g} {g}\" width=\"800\" height=\"800\">\n\
             <rect width=\"{g}\" height=\"{g}\" fill=\"white\"/>\n{}</svg>\n",
            self.body
        )
    }
}
