//! Record printing: pretty JSON, or an aligned two-column table.

use serde::Serialize;

/// `x` with `digits` significant digits, trailing zeros dropped.
pub fn number(x: f64, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.clamp(1, 17);
    let magnitude = x.abs().log10().floor() as i32;
    let s = if (-5..15).contains(&magnitude) {
        let decimals = (digits as i32 - 1 - magnitude).max(0) as usize;
        trim(&format!("{x:.decimals$}"))
    } else {
        let s = format!("{x:.*e}", digits - 1);
        match s.split_once('e') {
            Some((mantissa, exp)) => format!("{}e{exp}", trim(mantissa)),
            None => s,
        }
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn trim(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

pub fn complex(re: f64, im: f64, digits: usize) -> String {
    if im == 0.0 {
        number(re, digits)
    } else if im < 0.0 {
        format!("{}-{}i", number(re, digits), number(-im, digits))
    } else {
        format!("{}+{}i", number(re, digits), number(im, digits))
    }
}

/// Key/value rows printed with the keys padded to a common width.
#[derive(Default)]
pub struct Table {
    rows: Vec<(String, String)>,
}

impl Table {
    pub fn row(&mut self, key: impl Into<String>, value: impl Into<String>) -> &mut Self {
        self.rows.push((key.into(), value.into()));
        self
    }

    pub fn render(&self) -> String {
        let width = self.rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in &self.rows {
            let pad = width - k.chars().count();
            out.push_str(k);
            out.push_str(&" ".repeat(pad + 2));
            out.push_str(v);
            out.push('\n');
        }
        out
    }
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("records serialize");
    s.push('\n');
    s
}

pub fn matrix_rows(m: &[Vec<[f64; 2]>], digits: usize) -> Vec<String> {
    m.iter().map(|row| row.iter().map(|[re, im]| complex(*re, *im, digits)).collect::<Vec<_>>().join("  ")).collect()
}
