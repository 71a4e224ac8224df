//! String-literal prefixes and escape decoding.

/// A STRING token split into its parts.
#[derive(Clone, Copy, Debug)]
pub struct StrToken<'a> {
    pub is_bytes: bool,
    pub is_raw: bool,
    pub is_f: bool,
    /// Text between the quotes.
    pub body: &'a str,
    /// Byte offset of `body` within the token text.
    pub body_offset: usize,
}

pub fn split_string_token(text: &str) -> StrToken<'_> {
    let bytes = text.as_bytes();
    let mut i = 0;
    let (mut is_bytes, mut is_raw, mut is_f) = (false, false, false);
    while i < bytes.len() && bytes[i] != b'\'' && bytes[i] != b'"' {
        match bytes[i].to_ascii_lowercase() {
            b'b' => is_bytes = true,
            b'r' => is_raw = true,
            b'f' => is_f = true,
            _ => {}
        }
        i += 1;
    }
    let quote = bytes.get(i).copied().unwrap_or(b'"');
    let triple = bytes.len() >= i + 6 && bytes[i + 1] == quote && bytes[i + 2] == quote;
    let q = if triple { 3 } else { 1 };
    let start = (i + q).min(bytes.len());
    let end = bytes.len().saturating_sub(q).max(start);
    StrToken {
        is_bytes,
        is_raw,
        is_f,
        body: &text[start..end],
        body_offset: start,
    }
}

/// Turns `\r\n` and lone `\r` into `\n`, as CPython does before tokenizing.
pub fn normalize_newlines(s: &str) -> std::borrow::Cow<'_, str> {
    if !s.contains('\r') {
        return std::borrow::Cow::Borrowed(s);
    }
    std::borrow::Cow::Owned(s.replace("\r\n", "\n").replace('\r', "\n"))
}

fn hex_value(s: &[u8]) -> Option<u32> {
    let mut v: u32 = 0;
    for &c in s {
        v = v.checked_mul(16)? + (c as char).to_digit(16)?;
    }
    Some(v)
}

/// Decodes a non-bytes literal body. Errors carry the message CPython
/// would embed after "(unicode error) ".
pub fn decode_str(body: &str, raw: bool) -> Result<String, String> {
    let body = normalize_newlines(body);
    if raw || !body.contains('\\') {
        return Ok(body.into_owned());
    }
    let b = body.as_bytes();
    let mut out = String::with_capacity(b.len());
    let mut i = 0;
    let err = |start: usize, end: usize, what: &str| {
        format!("'unicodeescape' codec can't decode bytes in position {start}-{end}: {what}")
    };
    while i < b.len() {
        if b[i] != b'\\' {
            let ch = body[i..].chars().next().unwrap();
            out.push(ch);
            i += ch.len_utf8();
            continue;
        }
        let start = i;
        i += 1;
        // A lone trailing backslash stays literal.
        let Some(&c) = b.get(i) else {
            out.push('\\');
            break;
        };
        i += 1;
        match c {
            b'\n' => {}
            b'\\' => out.push('\\'),
            b'\'' => out.push('\''),
            b'"' => out.push('"'),
            b'a' => out.push('\u{7}'),
            b'b' => out.push('\u{8}'),
            b'f' => out.push('\u{c}'),
            b'n' => out.push('\n'),
            b'r' => out.push('\r'),
            b't' => out.push('\t'),
            b'v' => out.push('\u{b}'),
            b'0'..=b'7' => {
                let mut v = (c - b'0') as u32;
                let mut n = 1;
                while n < 3 && i < b.len() && (b'0'..=b'7').contains(&b[i]) {
                    v = v * 8 + (b[i] - b'0') as u32;
                    i += 1;
                    n += 1;
                }
                out.push(char::from_u32(v).unwrap_or('\u{fffd}'));
            }
            b'x' | b'u' | b'U' => {
                let (n, what) = match c {
                    b'x' => (2, "truncated \\xXX escape"),
                    b'u' => (4, "truncated \\uXXXX escape"),
                    _ => (8, "truncated \\UXXXXXXXX escape"),
                };
                let digits = &b[i..(i + n).min(b.len())];
                let valid = digits.len() == n && digits.iter().all(|d| d.is_ascii_hexdigit());
                if !valid {
                    let bad = digits.iter().take_while(|d| d.is_ascii_hexdigit()).count();
                    return Err(err(start, i + bad - 1, what));
                }
                let v = hex_value(digits).unwrap();
                i += n;
                if v > 0x10FFFF {
                    return Err(err(start, i - 1, "illegal Unicode character"));
                }
                out.push(char::from_u32(v).unwrap_or('\u{fffd}'));
            }
            b'N' => {
                // Names are not checked against the Unicode database.
                if b.get(i) != Some(&b'{') {
                    return Err(err(start, i - 1, "malformed \\N character escape"));
                }
                match body[i..].find('}') {
                    Some(close) if close > 1 => {
                        i += close + 1;
                        out.push('\u{fffd}');
                    }
                    _ => return Err(err(start, b.len() - 1, "malformed \\N character escape")),
                }
            }
            _ => {
                out.push('\\');
                // Re-read the escaped char as a full code point.
                i -= 1;
                let ch = body[i..].chars().next().unwrap();
                out.push(ch);
                i += ch.len_utf8();
            }
        }
    }
    Ok(out)
}

/// Decodes a bytes literal body. Errors are returned as complete messages.
pub fn decode_bytes(body: &str, raw: bool) -> Result<Vec<u8>, String> {
    if !body.is_ascii() {
        return Err("bytes can only contain ASCII literal characters.".to_string());
    }
    let body = normalize_newlines(body);
    let b = body.as_bytes();
    if raw {
        return Ok(b.to_vec());
    }
    let mut out = Vec::with_capacity(b.len());
    let mut i = 0;
    while i < b.len() {
        if b[i] != b'\\' {
            out.push(b[i]);
            i += 1;
            continue;
        }
        let start = i;
        i += 1;
        let Some(&c) = b.get(i) else {
            return Err("(value error) Trailing \\ in string".to_string());
        };
        i += 1;
        match c {
            b'\n' => {}
            b'\\' => out.push(b'\\'),
            b'\'' => out.push(b'\''),
            b'"' => out.push(b'"'),
            b'a' => out.push(7),
            b'b' => out.push(8),
            b'f' => out.push(12),
            b'n' => out.push(b'\n'),
            b'r' => out.push(b'\r'),
            b't' => out.push(b'\t'),
            b'v' => out.push(11),
            b'0'..=b'7' => {
                let mut v = (c - b'0') as u32;
                let mut n = 1;
                while n < 3 && i < b.len() && (b'0'..=b'7').contains(&b[i]) {
                    v = v * 8 + (b[i] - b'0') as u32;
                    i += 1;
                    n += 1;
                }
                out.push((v & 0xff) as u8);
            }
            b'x' => {
                let digits = &b[i..(i + 2).min(b.len())];
                if digits.len() != 2 || !digits.iter().all(|d| d.is_ascii_hexdigit()) {
                    return Err(format!(
                        "(value error) invalid \\x escape at position {start}"
                    ));
                }
                out.push(hex_value(digits).unwrap() as u8);
                i += 2;
            }
            _ => {
                out.push(b'\\');
                out.push(c);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_prefix_and_quotes() {
        let t = split_string_token("rb'''a\\n'''");
        assert!(t.is_bytes && t.is_raw && !t.is_f);
        assert_eq!(t.body, "a\\n");
        assert_eq!(t.body_offset, 5);
        let t = split_string_token("f\"{x}\"");
        assert!(t.is_f);
        assert_eq!(t.body, "{x}");
        let t = split_string_token("''");
        assert_eq!(t.body, "");
    }

    #[test]
    fn decodes_common_escapes() {
        assert_eq!(
            decode_str(r"a\tb\x41é\101\q", false).unwrap(),
            "a\tbAé\u{41}\\q"
        );
        assert_eq!(decode_str("a\\\nb", false).unwrap(), "ab");
        assert!(decode_str(r"\x4", false)
            .unwrap_err()
            .contains("truncated \\xXX"));
        assert_eq!(decode_str(r"\d", true).unwrap(), "\\d");
        assert_eq!(decode_str("a\\", false).unwrap(), "a\\");
    }

    #[test]
    fn bytes_reject_non_ascii() {
        assert!(decode_bytes("é", false).is_err());
        assert_eq!(decode_bytes(r"\x41\n", false).unwrap(), b"A\n");
    }
}
