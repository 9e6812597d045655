//! Structured-text reports and full-precision number formatting.
//!
//! Every numeric value written to an artifact goes through [`fmt_f64`] so
//! repeated runs of the same scenario produce bitwise-identical files.

/// Format with 17 significant digits; round-trips any finite f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// An ordered `[section] / key = value` report. Sections and keys render in
/// insertion order, which keeps artifacts deterministic.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    sections: Vec<(String, Vec<(String, String)>)>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    fn section_mut(&mut self, section: &str) -> &mut Vec<(String, String)> {
        if !self.sections.iter().any(|(name, _)| name == section) {
            self.sections.push((section.to_string(), Vec::new()));
        }
        &mut self
            .sections
            .iter_mut()
            .find(|(name, _)| name == section)
            .expect("section just inserted")
            .1
    }

    pub fn push_str(&mut self, section: &str, key: &str, value: &str) -> &mut Self {
        self.section_mut(section).push((key.to_string(), value.to_string()));
        self
    }

    pub fn push_f64(&mut self, section: &str, key: &str, value: f64) -> &mut Self {
        self.push_str(section, key, &fmt_f64(value))
    }

    pub fn push_usize(&mut self, section: &str, key: &str, value: usize) -> &mut Self {
        self.push_str(section, key, &value.to_string())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, (name, entries)) in self.sections.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            out.push('[');
            out.push_str(name);
            out.push_str("]\n");
            for (key, value) in entries {
                out.push_str(key);
                out.push_str(" = ");
                out.push_str(value);
                out.push('\n');
            }
        }
        out
    }
}

impl std::fmt::Display for Report {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt_round_trips_various_values() {
        for &x in &[0.0, 1.0, -0.5, 8.0, 1.0 / 3.0, 6.02e23, f64::MIN_POSITIVE] {
            let parsed: f64 = fmt_f64(x).parse().unwrap();
            assert_eq!(parsed.to_bits(), x.to_bits(), "round-trip failed for {x}");
        }
    }

    #[test]
    fn render_is_ordered_and_stable() {
        let mut r = Report::new();
        r.push_str("run", "scenario", "demo");
        r.push_f64("result", "value", 0.5);
        r.push_str("run", "kind", "simulate");
        let text = r.render();
        assert_eq!(
            text,
            "[run]\nscenario = demo\nkind = simulate\n\n[result]\nvalue = 5.0000000000000000e-1\n"
        );
        assert_eq!(text, r.render());
    }
}
