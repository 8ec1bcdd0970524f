//! Field-level normalization rules.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// First decimal number in `s`, ignoring any prefix and suffix text.
///
/// Accepts one decimal point and `,` thousands separators (`"3,000 mAh"`).
pub fn leading_number(s: &str) -> Option<f64> {
    let b = s.as_bytes();
    let start = b.iter().position(u8::is_ascii_digit)?;
    let mut digits = String::new();
    let mut i = start;
    let mut seen_dot = false;
    while i < b.len() {
        let c = b[i];
        if c.is_ascii_digit() {
            digits.push(c as char);
        } else if c == b'.' && !seen_dot && b.get(i + 1).is_some_and(u8::is_ascii_digit) {
            seen_dot = true;
            digits.push('.');
        } else if c == b','
            && !seen_dot
            && b.len() >= i + 4
            && b[i + 1..i + 4].iter().all(u8::is_ascii_digit)
            && !b.get(i + 4).is_some_and(u8::is_ascii_digit)
        {
            // thousands separator
        } else {
            break;
        }
        i += 1;
    }
    digits.parse().ok()
}

/// Leading unsigned integer of `s` and the byte offset just past it.
fn leading_int_at(s: &str, from: usize) -> Option<(u64, usize, usize)> {
    let b = s.as_bytes();
    let start = from + b[from..].iter().position(u8::is_ascii_digit)?;
    let end = start + b[start..].iter().take_while(|c| c.is_ascii_digit()).count();
    s[start..end].parse().ok().map(|v| (v, start, end))
}

/// Weight in grams with any unit text (`"g"`, `"gr"`, `"grams"`) removed.
pub fn parse_weight(s: &str) -> Result<f64> {
    leading_number(s).ok_or_else(|| Error::field("weight", alloc::format!("no digits in `{s}`")))
}

/// Splits `"<int> x <int>"` (optionally embedded in other text) into
/// `(v_resolution, h_resolution)`, in the order written.
pub fn split_resolution(s: &str) -> Result<(u32, u32)> {
    let b = s.as_bytes();
    let mut from = 0;
    while let Some((first, _, end)) = leading_int_at(s, from) {
        let mut j = end;
        while j < b.len() && b[j].is_ascii_whitespace() {
            j += 1;
        }
        let sep_len = if s[j..].starts_with('×') {
            '×'.len_utf8()
        } else if j < b.len() && (b[j] == b'x' || b[j] == b'X') {
            1
        } else {
            0
        };
        if sep_len > 0 {
            let mut k = j + sep_len;
            while k < b.len() && b[k].is_ascii_whitespace() {
                k += 1;
            }
            if k < b.len() && b[k].is_ascii_digit() {
                if let Some((second, _, _)) = leading_int_at(s, k) {
                    if first > 0
                        && second > 0
                        && first <= u32::MAX as u64
                        && second <= u32::MAX as u64
                    {
                        return Ok((first as u32, second as u32));
                    }
                }
            }
        }
        from = end;
    }
    Err(Error::field(
        "display_resolution",
        alloc::format!("no `<int> x <int>` in `{s}`"),
    ))
}

/// Video resolution with the trailing `p` and anything after the integer
/// dropped: `"1080p@30fps"` → 1080.
pub fn parse_video(s: &str) -> Result<u32> {
    leading_int_at(s, 0)
        .and_then(|(v, _, _)| u32::try_from(v).ok())
        .ok_or_else(|| Error::field("video", alloc::format!("no integer in `{s}`")))
}

fn parse_megabytes(field: &str, s: &str) -> Result<u32> {
    let v = leading_number(s)
        .ok_or_else(|| Error::field(field, alloc::format!("no digits in `{s}`")))?;
    let b = s.as_bytes();
    let start = b.iter().position(u8::is_ascii_digit).unwrap_or(0);
    let after = &s[start..];
    let unit: String = after
        .trim_start_matches(|c: char| c.is_ascii_digit() || c == '.' || c == ',')
        .trim_start()
        .chars()
        .take_while(|c| c.is_ascii_alphabetic())
        .flat_map(|c| c.to_lowercase())
        .collect();
    let mb = match unit.as_str() {
        "tb" => v * 1024.0 * 1024.0,
        "gb" | "g" => v * 1024.0,
        "kb" => v / 1024.0,
        _ => v,
    };
    let mb = libm::round(mb);
    if !(0.0..=u32::MAX as f64).contains(&mb) {
        return Err(Error::field(
            field,
            alloc::format!("value out of range in `{s}`"),
        ));
    }
    Ok(mb as u32)
}

/// RAM in megabytes: `"6 GB"` → 6144, `"512 MB"` → 512. A bare number is
/// read as megabytes.
pub fn parse_ram(s: &str) -> Result<u32> {
    parse_megabytes("ram", s)
}

/// Storage in megabytes, same unit handling as [`parse_ram`].
pub fn parse_storage(s: &str) -> Result<u32> {
    parse_megabytes("storage", s)
}

/// Camera resolution in megapixels (leading number).
pub fn parse_camera(s: &str) -> Result<f64> {
    leading_number(s).ok_or_else(|| Error::field("camera", alloc::format!("no digits in `{s}`")))
}

/// Battery capacity in mAh (leading number).
pub fn parse_battery(s: &str) -> Result<f64> {
    leading_number(s).ok_or_else(|| Error::field("battery", alloc::format!("no digits in `{s}`")))
}

/// Diagonal display size in inches (leading number).
pub fn parse_display_size(s: &str) -> Result<f64> {
    leading_number(s)
        .ok_or_else(|| Error::field("display_size", alloc::format!("no digits in `{s}`")))
}

/// First plausible four-digit year (1990–2100) in a release-date string.
pub fn parse_release_year(s: &str) -> Result<u32> {
    let mut from = 0;
    while let Some((v, start, end)) = leading_int_at(s, from) {
        if end - start == 4 && (1990..=2100).contains(&v) {
            return Ok(v as u32);
        }
        from = end;
    }
    Err(Error::field(
        "release_date",
        alloc::format!("no year in `{s}`"),
    ))
}

/// Price class: 0 below 250, 1 in [250, 500), 2 in [500, 750), 3 from 750.
pub fn price_class(price_euro: f64) -> Result<usize> {
    if !(price_euro > 0.0) || !price_euro.is_finite() {
        return Err(Error::field(
            "price_euro",
            alloc::format!("price {price_euro} must be positive"),
        ));
    }
    Ok(match price_euro {
        p if p < 250.0 => 0,
        p if p < 500.0 => 1,
        p if p < 750.0 => 2,
        _ => 3,
    })
}

/// Vocabulary key of a categorical value: text before the first `(`, `,` or
/// `;`, trimmed, with internal whitespace collapsed.
///
/// `"Android 9.0 (Pie); One UI"` → `"Android 9.0"`,
/// `"Qualcomm SDM845 Snapdragon 845 (10 nm)"` → `"Qualcomm SDM845 Snapdragon 845"`.
pub fn category_key(s: &str) -> String {
    let head = s.split(['(', ',', ';']).next().unwrap_or("");
    let words: Vec<&str> = head.split_whitespace().collect();
    words.join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_rules() {
        assert_eq!(parse_weight("190 g").unwrap(), 190.0);
        assert_eq!(parse_weight("208").unwrap(), 208.0);
        assert_eq!(parse_weight("168.5gr (5.93 oz)").unwrap(), 168.5);
        assert!(matches!(
            parse_weight("n/a"),
            Err(Error::InvalidField { .. })
        ));
    }

    #[test]
    fn resolution_rules() {
        assert_eq!(split_resolution("1080x2340").unwrap(), (1080, 2340));
        assert_eq!(split_resolution("720 x 1520 pixels").unwrap(), (720, 1520));
        assert_eq!(
            split_resolution("6.1 inches, 1170 × 2532 px").unwrap(),
            (1170, 2532)
        );
        assert!(split_resolution("1080p").is_err());
    }

    #[test]
    fn video_rules() {
        assert_eq!(parse_video("2160p").unwrap(), 2160);
        assert_eq!(parse_video("1080p@30fps").unwrap(), 1080);
        assert_eq!(parse_video("480").unwrap(), 480);
        assert!(parse_video("none").is_err());
    }

    #[test]
    fn memory_rules() {
        assert_eq!(parse_ram("6 GB").unwrap(), 6144);
        assert_eq!(parse_ram("512 MB").unwrap(), 512);
        assert_eq!(parse_ram("1.5GB RAM").unwrap(), 1536);
        assert_eq!(parse_ram("768").unwrap(), 768);
        assert_eq!(parse_storage("1TB").unwrap(), 1024 * 1024);
        assert_eq!(parse_storage("64GB storage, microSDXC").unwrap(), 65536);
    }

    #[test]
    fn other_numerics() {
        assert_eq!(parse_camera("12MP").unwrap(), 12.0);
        assert_eq!(parse_battery("3,000 mAh").unwrap(), 3000.0);
        assert_eq!(parse_battery("4000mAh").unwrap(), 4000.0);
        assert_eq!(parse_display_size("6.1\"").unwrap(), 6.1);
        assert_eq!(parse_release_year("Released 2018, March").unwrap(), 2018);
        assert_eq!(parse_release_year("2019-10-02").unwrap(), 2019);
        assert!(parse_release_year("Coming soon").is_err());
    }

    #[test]
    fn price_boundaries() {
        assert_eq!(price_class(249.99).unwrap(), 0);
        assert_eq!(price_class(250.0).unwrap(), 1);
        assert_eq!(price_class(499.99).unwrap(), 1);
        assert_eq!(price_class(500.0).unwrap(), 2);
        assert_eq!(price_class(750.0).unwrap(), 3);
        assert_eq!(price_class(10_000.0).unwrap(), 3);
        assert!(price_class(0.0).is_err());
        assert!(price_class(-5.0).is_err());
        assert!(price_class(f64::NAN).is_err());
    }

    #[test]
    fn category_keys() {
        assert_eq!(category_key("Android 9.0 (Pie); One UI"), "Android 9.0");
        assert_eq!(
            category_key("  Qualcomm   SDM845 Snapdragon 845 (10 nm)"),
            "Qualcomm SDM845 Snapdragon 845"
        );
        assert_eq!(category_key("iOS 12"), "iOS 12");
    }
}
