//! Error-tolerant HTML lexer and page parser.
//!
//! The lexer never fails: unterminated tags, stray `<` characters and
//! mis-nested elements all produce some token stream. It does not build a
//! tree; everything downstream works on the flat token sequence.

use std::borrow::Cow;
use std::sync::LazyLock;

use regex::Regex;

use super::domain::{registrable_domain, url_host};
use super::sentences::split_sentences;
use super::{IngestError, RawDocument};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HtmlToken {
    Start {
        name: String,
        attrs: Vec<(String, String)>,
        self_closing: bool,
    },
    End {
        name: String,
    },
    Text(String),
    Comment,
}

/// Elements whose content is raw text up to the matching end tag.
const RAW_TEXT: &[&str] = &["script", "style", "textarea", "title", "xmp"];

/// Elements whose text never counts as visible.
const HIDDEN: &[&str] = &["script", "style", "noscript", "title", "template"];

/// Elements that separate words in the visible text.
const BLOCK: &[&str] = &[
    "address", "article", "aside", "blockquote", "body", "br", "dd", "div", "dl", "dt",
    "fieldset", "figcaption", "figure", "footer", "form", "h1", "h2", "h3", "h4", "h5", "h6",
    "head", "header", "hr", "html", "li", "main", "nav", "ol", "option", "p", "pre", "section",
    "table", "td", "th", "tr", "ul",
];

fn is_name_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || matches!(b, b'-' | b':' | b'_' | b'.')
}

fn find_ci(haystack: &[u8], from: usize, needle: &[u8]) -> Option<usize> {
    if needle.is_empty() || haystack.len() < needle.len() {
        return None;
    }
    (from..=haystack.len() - needle.len())
        .find(|&i| haystack[i..i + needle.len()].eq_ignore_ascii_case(needle))
}

/// Splits markup into tags, text runs and comments, in document order.
pub fn tokenize(html: &str) -> Vec<HtmlToken> {
    let b = html.as_bytes();
    let len = b.len();
    let mut out = Vec::new();
    let mut i = 0;
    let mut text_start = 0;

    let flush = |out: &mut Vec<HtmlToken>, from: usize, to: usize| {
        if to > from {
            out.push(HtmlToken::Text(html[from..to].to_string()));
        }
    };

    while i < len {
        if b[i] != b'<' {
            i += 1;
            continue;
        }
        let next = b.get(i + 1).copied();
        if b[i..].starts_with(b"<!--") {
            flush(&mut out, text_start, i);
            i = match find_ci(b, i + 4, b"-->") {
                Some(p) => p + 3,
                None => len,
            };
            out.push(HtmlToken::Comment);
            text_start = i;
        } else if matches!(next, Some(b'!') | Some(b'?')) {
            // doctype, processing instruction, CDATA
            flush(&mut out, text_start, i);
            i = b[i..].iter().position(|&c| c == b'>').map_or(len, |p| i + p + 1);
            text_start = i;
        } else if next == Some(b'/') && b.get(i + 2).is_some_and(u8::is_ascii_alphabetic) {
            flush(&mut out, text_start, i);
            let start = i + 2;
            let mut j = start;
            while j < len && is_name_byte(b[j]) {
                j += 1;
            }
            let name = html[start..j].to_ascii_lowercase();
            i = b[j..].iter().position(|&c| c == b'>').map_or(len, |p| j + p + 1);
            out.push(HtmlToken::End { name });
            text_start = i;
        } else if next.is_some_and(|c| c.is_ascii_alphabetic()) {
            flush(&mut out, text_start, i);
            let (tok, after) = lex_start_tag(html, i + 1);
            i = after;
            let raw_name = match &tok {
                HtmlToken::Start { name, self_closing: false, .. } if RAW_TEXT.contains(&name.as_str()) => {
                    Some(name.clone())
                }
                _ => None,
            };
            out.push(tok);
            if let Some(name) = raw_name {
                let close = format!("</{name}");
                let end = find_ci(b, i, close.as_bytes()).unwrap_or(len);
                flush(&mut out, i, end);
                i = end;
            }
            text_start = i;
        } else {
            i += 1;
        }
    }
    flush(&mut out, text_start, len);
    out
}

/// Lexes a start tag whose name begins at `pos`. Returns the token and the
/// offset just past the closing `>` (or end of input).
fn lex_start_tag(html: &str, pos: usize) -> (HtmlToken, usize) {
    let b = html.as_bytes();
    let len = b.len();
    let mut j = pos;
    while j < len && is_name_byte(b[j]) {
        j += 1;
    }
    let name = html[pos..j].to_ascii_lowercase();
    let mut attrs = Vec::new();
    let mut self_closing = false;
    loop {
        while j < len && b[j].is_ascii_whitespace() {
            j += 1;
        }
        if j >= len {
            break;
        }
        match b[j] {
            b'>' => {
                j += 1;
                break;
            }
            b'/' => {
                if b.get(j + 1) == Some(&b'>') {
                    self_closing = true;
                    j += 2;
                    break;
                }
                j += 1;
                continue;
            }
            _ => {}
        }
        let name_start = j;
        while j < len && !b[j].is_ascii_whitespace() && !matches!(b[j], b'=' | b'>' | b'/') {
            j += 1;
        }
        if j == name_start {
            // lone '=' or similar junk
            j += 1;
            continue;
        }
        let attr_name = html[name_start..j].to_ascii_lowercase();
        let mut k = j;
        while k < len && b[k].is_ascii_whitespace() {
            k += 1;
        }
        let mut value = String::new();
        if k < len && b[k] == b'=' {
            k += 1;
            while k < len && b[k].is_ascii_whitespace() {
                k += 1;
            }
            if k < len && (b[k] == b'"' || b[k] == b'\'') {
                let q = b[k];
                let vstart = k + 1;
                let vend = b[vstart..].iter().position(|&c| c == q).map_or(len, |p| vstart + p);
                value = decode_entities(&html[vstart..vend]).into_owned();
                j = (vend + 1).min(len);
            } else {
                let vstart = k;
                while k < len && !b[k].is_ascii_whitespace() && b[k] != b'>' {
                    k += 1;
                }
                value = decode_entities(&html[vstart..k]).into_owned();
                j = k;
            }
        }
        attrs.push((attr_name, value));
    }
    (
        HtmlToken::Start {
            name,
            attrs,
            self_closing,
        },
        j,
    )
}

fn named_entity(name: &str) -> Option<char> {
    Some(match name {
        "amp" => '&',
        "lt" => '<',
        "gt" => '>',
        "quot" => '"',
        "apos" => '\'',
        "nbsp" => '\u{a0}',
        "copy" => '©',
        "reg" => '®',
        "trade" => '™',
        "mdash" => '—',
        "ndash" => '–',
        "hellip" => '…',
        "laquo" => '«',
        "raquo" => '»',
        "lsquo" => '‘',
        "rsquo" => '’',
        "ldquo" => '“',
        "rdquo" => '”',
        "middot" => '·',
        "euro" => '€',
        "pound" => '£',
        _ => return None,
    })
}

/// Decodes character references. Unknown references are left verbatim.
pub fn decode_entities(s: &str) -> Cow<'_, str> {
    if !s.contains('&') {
        return Cow::Borrowed(s);
    }
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(p) = rest.find('&') {
        out.push_str(&rest[..p]);
        let tail = &rest[p + 1..];
        let decoded = tail.find(';').filter(|&e| e > 0 && e <= 10).and_then(|e| {
            let body = &tail[..e];
            let ch = if let Some(num) = body.strip_prefix('#') {
                let code = match num.strip_prefix(['x', 'X']) {
                    Some(hex) => u32::from_str_radix(hex, 16).ok(),
                    None => num.parse::<u32>().ok(),
                };
                code.and_then(char::from_u32)
            } else {
                named_entity(body)
            };
            ch.map(|c| (c, e))
        });
        match decoded {
            Some((c, e)) => {
                out.push(c);
                rest = &tail[e + 1..];
            }
            None => {
                out.push('&');
                rest = tail;
            }
        }
    }
    out.push_str(rest);
    Cow::Owned(out)
}

fn normalize_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// A hyperlink or embedded resource reference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Link {
    /// Lowercase scheme (`https`, `mailto`, ...).
    pub protocol: String,
    /// Attribute value as written in the markup.
    pub target: String,
    /// Absolute form resolved against the page URL, when resolvable.
    pub resolved: Option<String>,
}

/// An `<a>` element: its `href` and visible text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Anchor {
    pub href: String,
    pub text: String,
}

/// One parsed web document.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParsedPage {
    pub url: String,
    /// Registrable domain of the page host.
    pub domain: String,
    pub title: String,
    pub body_text: String,
    pub sentences: Vec<String>,
    /// Lowercase tag names in document order; closing tags prefixed `/`.
    pub tag_stream: Vec<String>,
    pub links: Vec<Link>,
    pub anchors: Vec<Anchor>,
    pub html: String,
}

static META_CHARSET: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r#"(?i)<meta[^>]*?charset\s*=\s*["']?\s*([a-z0-9_\-:.]+)"#).unwrap()
});

fn charset_param(content_type: &str) -> Option<&str> {
    content_type.split(';').skip(1).find_map(|p| {
        let (k, v) = p.split_once('=')?;
        k.trim().eq_ignore_ascii_case("charset").then(|| v.trim().trim_matches(['"', '\'']))
    })
}

/// Decodes document bytes: BOM, then HTTP charset, then `<meta>` charset,
/// then UTF-8 with replacement characters.
pub fn decode_document(bytes: &[u8], content_type: &str) -> Result<String, IngestError> {
    let mime = content_type.split(';').next().unwrap_or("").trim().to_ascii_lowercase();
    if !mime.is_empty() && !(mime.starts_with("text/") || mime.contains("html") || mime.contains("xml")) {
        return Err(IngestError::Parse(format!("unsupported content type {mime}")));
    }
    if let Some((enc, bom_len)) = encoding_rs::Encoding::for_bom(bytes) {
        let (text, _) = enc.decode_without_bom_handling(&bytes[bom_len..]);
        return Ok(text.into_owned());
    }
    if bytes.starts_with(b"%PDF") {
        return Err(IngestError::Parse("PDF document".into()));
    }
    if bytes.iter().take(1024).any(|&c| c == 0) {
        return Err(IngestError::Parse("binary content".into()));
    }
    let declared = charset_param(content_type)
        .and_then(|l| encoding_rs::Encoding::for_label(l.as_bytes()))
        .or_else(|| {
            let head = String::from_utf8_lossy(&bytes[..bytes.len().min(2048)]);
            META_CHARSET
                .captures(&head)
                .and_then(|c| encoding_rs::Encoding::for_label(c[1].as_bytes()))
        })
        .unwrap_or(encoding_rs::UTF_8);
    let (text, _, _) = declared.decode(bytes);
    Ok(text.into_owned())
}

fn link_protocol(target: &str, base: Option<&url::Url>) -> (String, Option<String>) {
    let parsed = match base {
        Some(b) => b.join(target).ok(),
        None => url::Url::parse(target).ok(),
    };
    match parsed {
        Some(u) => (u.scheme().to_ascii_lowercase(), Some(u.to_string())),
        None => {
            let scheme = target
                .split_once(':')
                .map(|(s, _)| s)
                .filter(|s| {
                    s.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                        && s.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
                });
            (scheme.unwrap_or("relative").to_ascii_lowercase(), None)
        }
    }
}

/// Parses already-decoded markup.
pub fn parse_markup(url: &str, html: &str) -> ParsedPage {
    let base = url::Url::parse(url).ok();
    let domain = url_host(url).map(|h| registrable_domain(&h)).unwrap_or_default();
    let tokens = tokenize(html);

    let mut title: Option<String> = None;
    let mut in_title = false;
    let mut title_buf = String::new();
    let mut hidden_depth = 0usize;
    let mut text = String::new();
    let mut tag_stream = Vec::new();
    let mut links = Vec::new();
    let mut anchors = Vec::new();
    let mut open_anchor: Option<(String, String)> = None;

    for tok in tokens {
        match tok {
            HtmlToken::Start {
                name,
                attrs,
                self_closing,
            } => {
                for (k, v) in &attrs {
                    let v = v.trim();
                    if (k == "href" || k == "src") && !v.is_empty() {
                        let (protocol, resolved) = link_protocol(v, base.as_ref());
                        links.push(Link {
                            protocol,
                            target: v.to_string(),
                            resolved,
                        });
                    }
                }
                if name == "a" && !self_closing {
                    if let Some((href, t)) = open_anchor.take() {
                        anchors.push(Anchor { href, text: normalize_ws(&t) });
                    }
                    let href = attrs
                        .iter()
                        .find(|(k, _)| k == "href")
                        .map(|(_, v)| v.trim().to_string())
                        .unwrap_or_default();
                    open_anchor = Some((href, String::new()));
                }
                if name == "title" && title.is_none() && !self_closing {
                    in_title = true;
                }
                if HIDDEN.contains(&name.as_str()) && !self_closing {
                    hidden_depth += 1;
                }
                if BLOCK.contains(&name.as_str()) {
                    text.push(' ');
                }
                tag_stream.push(name);
            }
            HtmlToken::End { name } => {
                if name == "title" && in_title {
                    in_title = false;
                    title = Some(normalize_ws(&decode_entities(&title_buf)));
                }
                if HIDDEN.contains(&name.as_str()) {
                    hidden_depth = hidden_depth.saturating_sub(1);
                }
                if name == "a" {
                    if let Some((href, t)) = open_anchor.take() {
                        anchors.push(Anchor { href, text: normalize_ws(&t) });
                    }
                }
                if BLOCK.contains(&name.as_str()) {
                    text.push(' ');
                }
                tag_stream.push(format!("/{name}"));
            }
            HtmlToken::Text(t) => {
                if in_title {
                    title_buf.push_str(&t);
                }
                if hidden_depth == 0 {
                    let decoded = decode_entities(&t);
                    text.push_str(&decoded);
                    if let Some((_, a)) = open_anchor.as_mut() {
                        a.push_str(&decoded);
                    }
                }
            }
            HtmlToken::Comment => {}
        }
    }
    if let Some((href, t)) = open_anchor.take() {
        anchors.push(Anchor { href, text: normalize_ws(&t) });
    }
    if in_title && title.is_none() {
        title = Some(normalize_ws(&decode_entities(&title_buf)));
    }

    let body_text = normalize_ws(&text);
    let sentences = split_sentences(&body_text);
    ParsedPage {
        url: url.to_string(),
        domain,
        title: title.unwrap_or_default(),
        body_text,
        sentences,
        tag_stream,
        links,
        anchors,
        html: html.to_string(),
    }
}

/// Decodes and parses a raw document.
pub fn parse_html(doc: &RawDocument) -> Result<ParsedPage, IngestError> {
    let html = decode_document(&doc.bytes, &doc.content_type)?;
    Ok(parse_markup(&doc.url, &html))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn page(html: &str) -> ParsedPage {
        parse_html(&RawDocument::from_html("https://example.org/", html)).unwrap()
    }

    #[test]
    fn small_document() {
        let p = page("<html><title>T</title><body><a href='https://x'>t</a></body></html>");
        assert_eq!(p.title, "T");
        assert_eq!(
            p.tag_stream,
            ["html", "title", "/title", "body", "a", "/a", "/body", "/html"]
        );
        assert_eq!(p.links.len(), 1);
        assert_eq!(p.links[0].protocol, "https");
        assert_eq!(p.links[0].target, "https://x");
        assert_eq!(p.body_text, "t");
        assert_eq!(p.domain, "example.org");
    }

    #[test]
    fn inline_text_joins() {
        assert_eq!(page("<p>Hi <b>there</b></p>").body_text, "Hi there");
    }

    #[test]
    fn empty_document() {
        let p = page("");
        assert!(p.title.is_empty() && p.body_text.is_empty());
        assert!(p.sentences.is_empty() && p.tag_stream.is_empty() && p.links.is_empty());
    }

    #[test]
    fn hidden_content_is_dropped() {
        let p = page(
            "<head><style>p{color:red}</style><script>if (a<b) {}</script></head>\
             <body><!-- secret --><noscript>enable js</noscript><p>Shown &amp; told.</p></body>",
        );
        assert_eq!(p.body_text, "Shown & told.");
        assert_eq!(
            p.tag_stream,
            ["head", "style", "/style", "script", "/script", "/head", "body", "noscript", "/noscript", "p", "/p", "/body"]
        );
    }

    #[test]
    fn void_and_self_closing_emit_one_token() {
        assert_eq!(page("<br><img src=a.png/><hr />").tag_stream, ["br", "img", "hr"]);
    }

    #[test]
    fn malformed_markup_is_tolerated() {
        let p = page("</b>a < b <i>x</p><div class=\"unterminated");
        assert_eq!(p.tag_stream, ["/b", "i", "/p", "div"]);
        assert_eq!(p.body_text, "a < b x");
    }

    #[test]
    fn relative_links_resolve_against_page() {
        let p = page("<a href='/about'>About</a><a href='MAILTO:me@x.org'>mail</a><a href='javascript:void(0)'>j</a>");
        let protos: Vec<_> = p.links.iter().map(|l| l.protocol.as_str()).collect();
        assert_eq!(protos, ["https", "mailto", "javascript"]);
        assert_eq!(p.links[0].resolved.as_deref(), Some("https://example.org/about"));
        assert_eq!(p.anchors[0], Anchor { href: "/about".into(), text: "About".into() });
    }

    #[test]
    fn charset_from_meta() {
        let bytes = b"<meta charset=\"iso-8859-1\"><p>caf\xe9</p>".to_vec();
        let doc = RawDocument {
            bytes,
            content_type: String::new(),
            ..RawDocument::from_html("https://e.org/", "")
        };
        assert_eq!(parse_html(&doc).unwrap().body_text, "café");
    }

    #[test]
    fn binary_content_is_rejected() {
        let doc = RawDocument {
            bytes: b"%PDF-1.4 ...".to_vec(),
            content_type: String::new(),
            ..RawDocument::from_html("https://e.org/", "")
        };
        assert!(matches!(parse_html(&doc), Err(IngestError::Parse(_))));
        let doc = RawDocument {
            content_type: "application/pdf".into(),
            ..RawDocument::from_html("https://e.org/", "<p>x</p>")
        };
        assert!(matches!(parse_html(&doc), Err(IngestError::Parse(_))));
    }

    #[test]
    fn entities() {
        assert_eq!(decode_entities("&copy; 2024 &#65;&#x42; &bogus; &"), "© 2024 AB &bogus; &");
    }
}
