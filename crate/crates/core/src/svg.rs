//! Hand-emitted SVG primitives. Every coordinate is formatted with fixed
//! precision so identical scenes serialize to identical bytes.

/// Two decimal places is below a hundredth of a pixel at figure scale.
fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anchor {
    Start,
    Middle,
    End,
}

impl Anchor {
    fn as_str(&self) -> &'static str {
        match self {
            Anchor::Start => "start",
            Anchor::Middle => "middle",
            Anchor::End => "end",
        }
    }
}

/// A figure under construction: elements render in insertion order.
#[derive(Debug, Clone)]
pub struct SvgDoc {
    width: f64,
    height: f64,
    elements: Vec<String>,
}

impl SvgDoc {
    pub fn new(width: f64, height: f64) -> Self {
        SvgDoc { width, height, elements: Vec::new() }
    }

    pub fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        self.elements.push(format!(
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{fill}"/>"#,
            fmt(x),
            fmt(y),
            fmt(w),
            fmt(h)
        ));
    }

    pub fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64) {
        self.elements.push(format!(
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{stroke}" stroke-width="{}"/>"#,
            fmt(x1),
            fmt(y1),
            fmt(x2),
            fmt(y2),
            fmt(width)
        ));
    }

    fn points_attr(points: &[(f64, f64)]) -> String {
        points
            .iter()
            .map(|(x, y)| format!("{},{}", fmt(*x), fmt(*y)))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], stroke: &str, width: f64) {
        self.elements.push(format!(
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{}"/>"#,
            Self::points_attr(points),
            fmt(width)
        ));
    }

    pub fn polygon(&mut self, points: &[(f64, f64)], fill: &str, opacity: f64) {
        self.elements.push(format!(
            r#"<polygon points="{}" fill="{fill}" fill-opacity="{}" stroke="none"/>"#,
            Self::points_attr(points),
            fmt(opacity)
        ));
    }

    /// Polyline that moves horizontally first, then vertically, between
    /// consecutive points: the shape of a right-continuous step function.
    pub fn step_path(&mut self, points: &[(f64, f64)], stroke: &str, width: f64) {
        if points.is_empty() {
            return;
        }
        let mut expanded = Vec::with_capacity(points.len() * 2);
        expanded.push(points[0]);
        for pair in points.windows(2) {
            let (x1, _) = pair[1];
            let (_, y0) = pair[0];
            expanded.push((x1, y0));
            expanded.push(pair[1]);
        }
        self.polyline(&expanded, stroke, width);
    }

    pub fn text(&mut self, x: f64, y: f64, size: f64, anchor: Anchor, content: &str) {
        self.elements.push(format!(
            r#"<text x="{}" y="{}" font-size="{}" font-family="sans-serif" text-anchor="{}">{}</text>"#,
            fmt(x),
            fmt(y),
            fmt(size),
            anchor.as_str(),
            escape(content)
        ));
    }

    pub fn finish(self) -> String {
        let mut out = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" \
             viewBox=\"0 0 {} {}\">\n",
            fmt(self.width),
            fmt(self.height),
            fmt(self.width),
            fmt(self.height)
        );
        for e in &self.elements {
            out.push_str(e);
            out.push('\n');
        }
        out.push_str("</svg>\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_scenes_serialize_identically() {
        let build = || {
            let mut doc = SvgDoc::new(100.0, 50.0);
            doc.rect(0.0, 0.0, 100.0, 50.0, "#ffffff");
            doc.polyline(&[(0.0, 0.0), (10.0, 20.0)], "#000000", 1.5);
            doc.text(5.0, 5.0, 10.0, Anchor::Middle, "a < b & c");
            doc.finish()
        };
        assert_eq!(build(), build());
    }

    #[test]
    fn text_is_xml_escaped() {
        let mut doc = SvgDoc::new(10.0, 10.0);
        doc.text(0.0, 0.0, 8.0, Anchor::Start, "x<y & y>z");
        let svg = doc.finish();
        assert!(svg.contains("x&lt;y &amp; y&gt;z"));
        assert!(!svg.contains("x<y"));
    }

    #[test]
    fn step_path_inserts_corner_points() {
        let mut doc = SvgDoc::new(10.0, 10.0);
        doc.step_path(&[(0.0, 5.0), (4.0, 2.0)], "#000000", 1.0);
        let svg = doc.finish();
        assert!(svg.contains(r#"points="0.00,5.00 4.00,5.00 4.00,2.00""#), "{svg}");
    }

    #[test]
    fn coordinates_use_fixed_precision() {
        let mut doc = SvgDoc::new(10.0, 10.0);
        doc.line(1.0 / 3.0, 0.1 + 0.2, 2.0, 3.0, "#123456", 1.0);
        let svg = doc.finish();
        assert!(svg.contains(r#"x1="0.33""#));
        assert!(svg.contains(r#"y1="0.30""#));
    }
}
