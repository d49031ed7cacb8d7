use std::fs;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};

/// Fixed-point rendering with 12 significant digits.
pub fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Writes `text` to `path`, or to stdout for `-`.
pub fn emit(path: &Path, text: &str) -> Result<()> {
    if path.as_os_str() == "-" {
        io::stdout().lock().write_all(text.as_bytes())?;
        return Ok(());
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(sig12(3f64.ln() / 3.0), "0.366204096223");
        assert_eq!(sig12(1.0), "1.00000000000");
        assert_eq!(sig12(-0.125), "-0.125000000000");
        assert_eq!(sig12(123456.789), "123456.789000");
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(1e13), "10000000000000");
    }
}
