//! Plain-text `key = value` reports.

use std::fmt::Display;

use num_complex::Complex64;

#[derive(Debug, Default)]
pub struct Report {
    lines: Vec<(String, String)>,
}

impl Report {
    pub fn put(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.lines.push((key.to_string(), value.to_string()));
        self
    }

    pub fn real(&mut self, key: &str, value: f64) -> &mut Self {
        self.put(key, format!("{value:.6e}"))
    }

    pub fn complex(&mut self, key: &str, value: Complex64) -> &mut Self {
        self.put(key, format!("{:.12e}{:+.12e}i", value.re, value.im))
    }

    pub fn render(&self) -> String {
        self.lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lines_are_key_value() {
        let mut r = Report::default();
        r.put("index", 1).real("error", 1.5e-7).complex("c", Complex64::new(1.0, -0.5));
        assert_eq!(r.render(), "index = 1\nerror = 1.500000e-7\nc = 1.000000000000e0-5.000000000000e-1i\n");
    }
}
