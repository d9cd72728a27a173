use std::fmt::Write;

use thiserror::Error;

#[derive(Clone, Debug, PartialEq)]
pub struct RenderStyle {
    pub width_px: u32,
    pub height_px: u32,
    pub point_radius: f64,
    /// Draw a dashed polyline through consecutive samples.
    pub connect: bool,
    pub margin: f64,
}

impl Default for RenderStyle {
    fn default() -> Self {
        RenderStyle {
            width_px: 800,
            height_px: 600,
            point_radius: 2.0,
            connect: true,
            margin: 20.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum RenderError {
    #[error("need at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("invalid style: {0}")]
    InvalidStyle(&'static str),
    #[error("non-finite coordinate at point {0}")]
    NonFinite(usize),
}

/// Affine map from curve coordinates to pixels, with `y` pointing up.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Viewport {
    pub scale: f64,
    pub min: [f64; 2],
    pub offset: [f64; 2],
    pub height: f64,
}

impl Viewport {
    /// Fits the bounding box of `points` into the drawing area, preserving
    /// aspect ratio and centring the shorter side.
    pub fn fit(points: &[[f64; 2]], style: &RenderStyle) -> Viewport {
        let (w, h, m) = (style.width_px as f64, style.height_px as f64, style.margin);
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        for p in points {
            for k in 0..2 {
                min[k] = min[k].min(p[k]);
                max[k] = max[k].max(p[k]);
            }
        }
        let extent = [max[0] - min[0], max[1] - min[1]];
        let room = [w - 2.0 * m, h - 2.0 * m];
        let scale = match (extent[0] > 0.0, extent[1] > 0.0) {
            (true, true) => (room[0] / extent[0]).min(room[1] / extent[1]),
            (true, false) => room[0] / extent[0],
            (false, true) => room[1] / extent[1],
            (false, false) => 1.0,
        };
        let offset = [
            m + (room[0] - extent[0] * scale) / 2.0,
            m + (room[1] - extent[1] * scale) / 2.0,
        ];
        Viewport {
            scale,
            min,
            offset,
            height: h,
        }
    }

    pub fn to_pixel(&self, p: [f64; 2]) -> [f64; 2] {
        [
            self.offset[0] + (p[0] - self.min[0]) * self.scale,
            self.height - (self.offset[1] + (p[1] - self.min[1]) * self.scale),
        ]
    }

    pub fn from_pixel(&self, q: [f64; 2]) -> [f64; 2] {
        [
            (q[0] - self.offset[0]) / self.scale + self.min[0],
            (self.height - q[1] - self.offset[1]) / self.scale + self.min[1],
        ]
    }
}

pub fn render_svg(points: &[[f64; 2]], style: &RenderStyle) -> Result<String, RenderError> {
    if points.len() < 2 {
        return Err(RenderError::TooFewPoints(points.len()));
    }
    if style.width_px == 0 || style.height_px == 0 {
        return Err(RenderError::InvalidStyle("dimensions must be positive"));
    }
    if !(style.margin >= 0.0) || 2.0 * style.margin >= style.width_px.min(style.height_px) as f64 {
        return Err(RenderError::InvalidStyle("margin must be non-negative and leave room to draw"));
    }
    if !(style.point_radius >= 0.0) {
        return Err(RenderError::InvalidStyle("point radius must be non-negative"));
    }
    if let Some(i) = points.iter().position(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(RenderError::NonFinite(i));
    }
    let view = Viewport::fit(points, style);
    let pixels: Vec<[f64; 2]> = points.iter().map(|&p| view.to_pixel(p)).collect();

    let mut out = String::new();
    let (w, h) = (style.width_px, style.height_px);
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
    if style.connect {
        out.push_str(r#"<polyline fill="none" stroke="gray" stroke-width="0.5" stroke-dasharray="4 3" points=""#);
        for (i, q) in pixels.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            write!(out, "{:.6},{:.6}", q[0], q[1]).unwrap();
        }
        out.push_str("\"/>\n");
    }
    out.push_str("<g fill=\"black\">\n");
    for q in &pixels {
        writeln!(out, r#"<circle cx="{:.6}" cy="{:.6}" r="{:.6}"/>"#, q[0], q[1], style.point_radius).unwrap();
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}
