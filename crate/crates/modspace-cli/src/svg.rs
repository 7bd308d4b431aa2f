//! A small deterministic SVG emitter: data-space coordinates in, fixed-width
//! decimal pixel coordinates out.

use std::fmt::Write;

pub struct Panel {
    origin: (f64, f64),
    size: (f64, f64),
    x_range: (f64, f64),
    y_range: (f64, f64),
    body: String,
}

impl Panel {
    pub fn new(origin: (f64, f64), size: (f64, f64), x_range: (f64, f64), y_range: (f64, f64)) -> Panel {
        Panel {
            origin,
            size,
            x_range,
            y_range,
            body: String::new(),
        }
    }

    fn px(&self, x: f64) -> f64 {
        self.origin.0 + (x - self.x_range.0) / (self.x_range.1 - self.x_range.0) * self.size.0
    }

    fn py(&self, y: f64) -> f64 {
        // SVG y grows downward.
        self.origin.1 + (self.y_range.1 - y) / (self.y_range.1 - self.y_range.0) * self.size.1
    }

    pub fn frame(&mut self, x_label: &str, y_label: &str) {
        let (ox, oy) = self.origin;
        let (w, h) = self.size;
        writeln!(
            self.body,
            r##"<rect x="{ox:.1}" y="{oy:.1}" width="{w:.1}" height="{h:.1}" fill="none" stroke="#444" stroke-width="1"/>"#
        )
        .unwrap();
        writeln!(
            self.body,
            r##"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle" fill="#222">{x_label}</text>"##,
            ox + w / 2.0,
            oy + h + 30.0
        )
        .unwrap();
        writeln!(
            self.body,
            r##"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle" fill="#222" transform="rotate(-90 {:.1} {:.1})">{y_label}</text>"##,
            ox - 32.0,
            oy + h / 2.0,
            ox - 32.0,
            oy + h / 2.0
        )
        .unwrap();
        // Range labels at the corners.
        writeln!(
            self.body,
            r##"<text x="{:.1}" y="{:.1}" font-size="9" text-anchor="start" fill="#666">{:.3}</text>"##,
            ox,
            oy + h + 12.0,
            self.x_range.0
        )
        .unwrap();
        writeln!(
            self.body,
            r##"<text x="{:.1}" y="{:.1}" font-size="9" text-anchor="end" fill="#666">{:.3}</text>"##,
            ox + w,
            oy + h + 12.0,
            self.x_range.1
        )
        .unwrap();
        writeln!(
            self.body,
            r##"<text x="{:.1}" y="{:.1}" font-size="9" text-anchor="end" fill="#666">{:.3}</text>"##,
            ox - 4.0,
            oy + h,
            self.y_range.0
        )
        .unwrap();
        writeln!(
            self.body,
            r##"<text x="{:.1}" y="{:.1}" font-size="9" text-anchor="end" fill="#666">{:.3}</text>"##,
            ox - 4.0,
            oy + 10.0,
            self.y_range.1
        )
        .unwrap();
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], style: &str) {
        if points.len() < 2 {
            return;
        }
        let mut d = String::with_capacity(points.len() * 12);
        for (i, (x, y)) in points.iter().enumerate() {
            let _ = write!(d, "{}{:.2},{:.2}", if i == 0 { "M" } else { " L" }, self.px(*x), self.py(*y));
        }
        writeln!(self.body, r##"<path d="{d}" fill="none" style="{style}"/>"##).unwrap();
    }

    pub fn segment(&mut self, a: (f64, f64), b: (f64, f64), style: &str) {
        writeln!(
            self.body,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" style="{style}"/>"##,
            self.px(a.0),
            self.py(a.1),
            self.px(b.0),
            self.py(b.1)
        )
        .unwrap();
    }

    pub fn circle(&mut self, x: f64, y: f64, radius_px: f64, style: &str) {
        writeln!(
            self.body,
            r##"<circle cx="{:.2}" cy="{:.2}" r="{radius_px:.1}" style="{style}"/>"##,
            self.px(x),
            self.py(y)
        )
        .unwrap();
    }

    pub fn text(&mut self, x: f64, y: f64, content: &str, style: &str) {
        writeln!(
            self.body,
            r##"<text x="{:.2}" y="{:.2}" {style}>{content}</text>"##,
            self.px(x),
            self.py(y)
        )
        .unwrap();
    }

    pub fn text_px(&mut self, px: f64, py: f64, content: &str, style: &str) {
        writeln!(self.body, r##"<text x="{px:.1}" y="{py:.1}" {style}>{content}</text>"##).unwrap();
    }

    pub fn into_body(self) -> String {
        self.body
    }
}

pub fn document(width: f64, height: f64, bodies: &[String]) -> String {
    let mut out = format!(
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">
<rect width="{width:.0}" height="{height:.0}" fill="white"/>
"##
    );
    for body in bodies {
        out.push_str(body);
    }
    out.push_str("</svg>\n");
    out
}

/// Diverging blue → light → red map for t in [0, 1].
pub fn diverging_color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64, u: f64| a + (b - a) * u;
    let (r, g, b) = if t < 0.5 {
        let u = t * 2.0;
        (lerp(33.0, 247.0, u), lerp(102.0, 247.0, u), lerp(172.0, 247.0, u))
    } else {
        let u = (t - 0.5) * 2.0;
        (lerp(247.0, 178.0, u), lerp(247.0, 24.0, u), lerp(247.0, 43.0, u))
    };
    format!("#{:02x}{:02x}{:02x}", r as u8, g as u8, b as u8)
}

/// Data range widened a touch so curves do not touch the frame.
pub fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| {
        (l.min(v), h.max(v))
    });
    let pad = ((hi - lo).abs()).max(1e-9) * 0.07;
    (lo - pad, hi + pad)
}
