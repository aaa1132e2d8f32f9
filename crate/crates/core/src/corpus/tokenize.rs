/// Lowercases and splits on whitespace and punctuation. Punctuation becomes
/// its own token unless it sits between two alphanumeric characters
/// (`18:00`, `guest-house`, `o'clock` stay whole). Bracketed slot tokens such
/// as `[time]` are kept intact.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        let lower = chunk.to_lowercase();
        let chars: Vec<char> = lower.chars().collect();
        let mut i = 0;
        let mut cur = String::new();
        while i < chars.len() {
            if chars[i] == '[' {
                if let Some(len) = slot_token_len(&chars[i..]) {
                    if !cur.is_empty() {
                        out.push(std::mem::take(&mut cur));
                    }
                    out.push(chars[i..i + len].iter().collect());
                    i += len;
                    continue;
                }
            }
            let c = chars[i];
            if c.is_alphanumeric() {
                cur.push(c);
            } else {
                let inner = i > 0
                    && i + 1 < chars.len()
                    && chars[i - 1].is_alphanumeric()
                    && chars[i + 1].is_alphanumeric();
                if inner {
                    cur.push(c);
                } else {
                    if !cur.is_empty() {
                        out.push(std::mem::take(&mut cur));
                    }
                    out.push(c.to_string());
                }
            }
            i += 1;
        }
        if !cur.is_empty() {
            out.push(cur);
        }
    }
    out
}

fn is_slot_char(c: char) -> bool {
    c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '-'
}

fn slot_token_len(chars: &[char]) -> Option<usize> {
    let close = chars.iter().position(|&c| c == ']')?;
    (close > 1 && chars[1..close].iter().all(|&c| is_slot_char(c))).then_some(close + 1)
}

/// True for tokens of the form `[name]`.
pub fn is_slot_token(token: &str) -> bool {
    let chars: Vec<char> = token.chars().collect();
    chars.first() == Some(&'[') && slot_token_len(&chars) == Some(chars.len())
}

/// Tokenizes a slot value; values are matched and stored in this normalized form.
pub fn normalize_value(value: &str) -> String {
    tokenize(value).join(" ")
}
