//! Helpers shared by the e2e and acceptance suites.

#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_lagdep")
}

pub fn run_cli(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal exit")
}

pub fn stderr_text(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Minimal well-formedness check: one root element, balanced tags, quoted
/// attributes, valid entity references. Enough to guarantee a conformant
/// XML parser accepts the document.
pub fn check_xml(s: &str) -> Result<(), String> {
    let b = s.as_bytes();
    let mut i = 0usize;
    let mut stack: Vec<String> = Vec::new();
    let mut root_closed = false;
    let fail = |i: usize, msg: &str| Err(format!("offset {i}: {msg}"));

    while i < b.len() {
        if b[i] == b'<' {
            if s[i..].starts_with("<!--") {
                match s[i + 4..].find("-->") {
                    Some(end) => i += 4 + end + 3,
                    None => return fail(i, "unterminated comment"),
                }
                continue;
            }
            if s[i..].starts_with("<?") {
                match s[i + 2..].find("?>") {
                    Some(end) => i += 2 + end + 2,
                    None => return fail(i, "unterminated processing instruction"),
                }
                continue;
            }
            if s[i..].starts_with("</") {
                let rest = &s[i + 2..];
                let end = match rest.find('>') {
                    Some(e) => e,
                    None => return fail(i, "unterminated closing tag"),
                };
                let name = rest[..end].trim();
                match stack.pop() {
                    Some(open) if open == name => {}
                    Some(open) => return fail(i, &format!("</{name}> closes <{open}>")),
                    None => return fail(i, "closing tag without opener"),
                }
                if stack.is_empty() {
                    root_closed = true;
                }
                i += 2 + end + 1;
                continue;
            }
            if root_closed {
                return fail(i, "content after root element");
            }
            i += 1;
            let name_start = i;
            while i < b.len() && !b[i].is_ascii_whitespace() && b[i] != b'>' && b[i] != b'/' {
                i += 1;
            }
            let name = &s[name_start..i];
            if name.is_empty() {
                return fail(name_start, "empty tag name");
            }
            let mut self_closing = false;
            loop {
                while i < b.len() && b[i].is_ascii_whitespace() {
                    i += 1;
                }
                if i >= b.len() {
                    return fail(name_start, "unterminated tag");
                }
                if b[i] == b'/' {
                    if i + 1 >= b.len() || b[i + 1] != b'>' {
                        return fail(i, "stray slash in tag");
                    }
                    self_closing = true;
                    i += 2;
                    break;
                }
                if b[i] == b'>' {
                    i += 1;
                    break;
                }
                while i < b.len() && b[i] != b'=' && !b[i].is_ascii_whitespace() {
                    if b[i] == b'>' || b[i] == b'/' || b[i] == b'"' || b[i] == b'\'' {
                        return fail(i, "malformed attribute name");
                    }
                    i += 1;
                }
                while i < b.len() && b[i].is_ascii_whitespace() {
                    i += 1;
                }
                if i >= b.len() || b[i] != b'=' {
                    return fail(i, "attribute without value");
                }
                i += 1;
                while i < b.len() && b[i].is_ascii_whitespace() {
                    i += 1;
                }
                if i >= b.len() || (b[i] != b'"' && b[i] != b'\'') {
                    return fail(i, "unquoted attribute value");
                }
                let quote = b[i];
                i += 1;
                let val_start = i;
                while i < b.len() && b[i] != quote {
                    if b[i] == b'<' {
                        return fail(i, "raw '<' in attribute value");
                    }
                    i += 1;
                }
                if i >= b.len() {
                    return fail(val_start, "unterminated attribute value");
                }
                check_entities(&s[val_start..i], val_start)?;
                i += 1;
            }
            if !self_closing {
                stack.push(name.to_string());
            } else if stack.is_empty() {
                root_closed = true;
            }
            continue;
        }
        if root_closed && !b[i].is_ascii_whitespace() {
            return fail(i, "content after root element");
        }
        if b[i] == b'&' {
            let end = s[i..]
                .find(';')
                .ok_or_else(|| format!("offset {i}: unterminated entity"))?;
            check_entities(&s[i..i + end + 1], i)?;
            i += end + 1;
            continue;
        }
        i += 1;
    }
    if !stack.is_empty() {
        return Err(format!("unclosed tags: {stack:?}"));
    }
    if !root_closed {
        return Err("no root element".into());
    }
    Ok(())
}

fn check_entities(text: &str, base: usize) -> Result<(), String> {
    let mut rest = text;
    let mut pos = base;
    while let Some(idx) = rest.find('&') {
        let after = &rest[idx + 1..];
        let semi = after
            .find(';')
            .ok_or_else(|| format!("offset {}: unterminated entity", pos + idx))?;
        let name = &after[..semi];
        let valid = matches!(name, "amp" | "lt" | "gt" | "quot" | "apos")
            || (name.strip_prefix('#').is_some_and(|d| {
                d.strip_prefix('x')
                    .map(|h| !h.is_empty() && h.bytes().all(|c| c.is_ascii_hexdigit()))
                    .unwrap_or_else(|| !d.is_empty() && d.bytes().all(|c| c.is_ascii_digit()))
            }));
        if !valid {
            return Err(format!("offset {}: bad entity &{name};", pos + idx));
        }
        pos += idx + 1 + semi + 1;
        rest = &rest[idx + 1 + semi + 1..];
    }
    Ok(())
}

pub fn assert_well_formed_svg(path: &Path) {
    let text = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {path:?}: {e}"));
    if let Err(msg) = check_xml(&text) {
        panic!("{path:?} is not well-formed XML: {msg}");
    }
    assert!(text.contains("<svg"), "{path:?} has no svg element");
}

#[test]
fn xml_checker_accepts_and_rejects() {
    assert!(check_xml("<a><b x=\"1\"/><c>t &amp; u</c></a>").is_ok());
    assert!(check_xml("<a attr='v'>text</a>").is_ok());
    assert!(check_xml("<a><b></a></b>").is_err());
    assert!(check_xml("<a>").is_err());
    assert!(check_xml("<a/><b/>").is_err());
    assert!(check_xml("<a>&nope;</a>").is_err());
    assert!(check_xml("<a x=unquoted></a>").is_err());
    assert!(check_xml("<a>&#x3c;&#60;</a>").is_ok());
}
