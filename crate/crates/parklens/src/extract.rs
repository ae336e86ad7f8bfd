//! Offline extraction of review records from saved TripAdvisor-style HTML
//! pages, and serialization to the `Score,Date,Title,Review` CSV schema.
//!
//! Pages are parsed with a small forgiving HTML reader: unknown tags are
//! kept as tree nodes, stray close tags are ignored, and review blocks with
//! missing sub-elements are skipped and counted rather than failing the
//! whole page.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One extracted review record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawReview {
    /// Bubble score scaled to 1..=5.
    pub rating: u8,
    /// Calendar date string as found in the date element's `title` attribute.
    pub date: String,
    pub title: String,
    /// Review body with all whitespace runs (including newlines) collapsed
    /// to single spaces.
    pub body: String,
    /// Identifier of the fixture file the record came from.
    pub source_page: String,
}

/// Class names that locate the review container and its sub-elements.
/// Defaults are the markup observed on saved listing pages; TripAdvisor
/// class names drift, so these are configuration rather than constants.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PageSelectors {
    pub review_container: String,
    pub bubble_class_prefix: String,
    pub date_class: String,
    pub title_class: String,
    pub body_class: String,
}

impl Default for PageSelectors {
    fn default() -> Self {
        PageSelectors {
            review_container: "Dq9MAugU T870kzTX LnVzGwUB".into(),
            bubble_class_prefix: "ui_bubble_rating bubble_".into(),
            date_class: "_34Xs-BQm".into(),
            title_class: "glasR4aX".into(),
            body_class: "IRsGHoPm".into(),
        }
    }
}

impl PageSelectors {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("review_container", &self.review_container),
            ("bubble_class_prefix", &self.bubble_class_prefix),
            ("date_class", &self.date_class),
            ("title_class", &self.title_class),
            ("body_class", &self.body_class),
        ] {
            if value.trim().is_empty() {
                return Err(Error::Config(format!("selector {name} is empty")));
            }
        }
        Ok(())
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let selectors: PageSelectors = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        selectors.validate()?;
        Ok(selectors)
    }
}

/// Result of parsing one page: records in document order plus the number of
/// review blocks skipped because a sub-element was missing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedPage {
    pub reviews: Vec<RawReview>,
    pub skipped: usize,
}

/// Decode a 1..=5 rating from a bubble class attribute such as
/// `"ui_bubble_rating bubble_40"`: the `bubble_NN` token carries the score
/// times ten.
pub fn decode_bubble_score(class_attribute: &str) -> Result<u8> {
    for token in class_attribute.split_whitespace() {
        if let Some(suffix) = token.strip_prefix("bubble_") {
            return match suffix {
                "10" => Ok(1),
                "20" => Ok(2),
                "30" => Ok(3),
                "40" => Ok(4),
                "50" => Ok(5),
                _ => Err(Error::BubbleDecode {
                    attribute: class_attribute.to_string(),
                }),
            };
        }
    }
    Err(Error::BubbleDecode {
        attribute: class_attribute.to_string(),
    })
}

/// Parse one saved HTML page into review records.
///
/// Review containers missing the bubble, date, title, or body element are
/// skipped and counted in [`ParsedPage::skipped`]. Zero containers is an
/// empty result, not an error.
pub fn parse_review_page(
    html: &str,
    selectors: &PageSelectors,
    source_page: &str,
) -> Result<ParsedPage> {
    selectors.validate()?;
    let dom = parse_document(html)?;
    let mut reviews = Vec::new();
    let mut skipped = 0;

    for container in dom.descendants().filter(|e| e.class_equals(&selectors.review_container)) {
        match extract_review(container, selectors, source_page) {
            Some(review) => reviews.push(review),
            None => skipped += 1,
        }
    }
    Ok(ParsedPage { reviews, skipped })
}

fn extract_review(
    container: &Element,
    selectors: &PageSelectors,
    source_page: &str,
) -> Option<RawReview> {
    let bubble = container
        .descendants()
        .find(|e| e.class_contains(&selectors.bubble_class_prefix))?;
    let rating = decode_bubble_score(bubble.attr("class")?).ok()?;
    let date = container
        .descendants()
        .find(|e| e.class_equals(&selectors.date_class))?
        .attr("title")?
        .to_string();
    let title = container
        .descendants()
        .find(|e| e.class_equals(&selectors.title_class))?
        .text_content();
    let body = container
        .descendants()
        .find(|e| e.class_equals(&selectors.body_class))?
        .text_content();
    Some(RawReview {
        rating,
        date,
        title,
        body,
        source_page: source_page.to_string(),
    })
}

/// Parse every `*.html` file in a directory (sorted by file name) and
/// concatenate the results.
pub fn extract_dir(dir: impl AsRef<Path>, selectors: &PageSelectors) -> Result<ParsedPage> {
    let dir = dir.as_ref();
    let mut paths: Vec<_> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|e| Error::io(dir, e))?
        .into_iter()
        .map(|entry| entry.path())
        .filter(|p| p.extension().is_some_and(|ext| ext == "html"))
        .collect();
    paths.sort();

    let mut combined = ParsedPage {
        reviews: Vec::new(),
        skipped: 0,
    };
    for path in paths {
        let html = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let page = parse_review_page(&html, selectors, &name)?;
        combined.reviews.extend(page.reviews);
        combined.skipped += page.skipped;
    }
    Ok(combined)
}

/// Write records to CSV with the header `Score,Date,Title,Review` and
/// RFC 4180 quoting. Returns the number of records written.
pub fn write_corpus_csv(reviews: &[RawReview], path: impl AsRef<Path>) -> Result<usize> {
    let path = path.as_ref();
    let mut writer = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Data(format!("{}: {other:?}", path.display())),
    })?;
    let as_data = |e: csv::Error| Error::Data(format!("{}: {e}", path.display()));
    writer
        .write_record(["Score", "Date", "Title", "Review"])
        .map_err(as_data)?;
    for review in reviews {
        writer
            .write_record([
                review.rating.to_string().as_str(),
                &review.date,
                &review.title,
                &review.body,
            ])
            .map_err(as_data)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(reviews.len())
}

// ---------------------------------------------------------------------------
// Forgiving HTML reader
// ---------------------------------------------------------------------------

#[derive(Debug)]
struct Element {
    name: String,
    attrs: Vec<(String, String)>,
    children: Vec<Node>,
}

#[derive(Debug)]
enum Node {
    Element(Element),
    Text(String),
}

impl Element {
    fn attr(&self, name: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(n, _)| n.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }

    fn class_equals(&self, class: &str) -> bool {
        self.attr("class") == Some(class)
    }

    fn class_contains(&self, needle: &str) -> bool {
        self.attr("class").is_some_and(|c| c.contains(needle))
    }

    /// Pre-order traversal of descendant elements, excluding `self`.
    fn descendants(&self) -> Descendants<'_> {
        Descendants {
            stack: self
                .children
                .iter()
                .rev()
                .filter_map(Node::as_element)
                .collect(),
        }
    }

    /// Concatenated text of all descendant text nodes with whitespace runs
    /// collapsed to single spaces.
    fn text_content(&self) -> String {
        let mut raw = String::new();
        self.collect_text(&mut raw);
        raw.split_whitespace().collect::<Vec<_>>().join(" ")
    }

    fn collect_text(&self, out: &mut String) {
        for child in &self.children {
            match child {
                Node::Text(t) => {
                    out.push(' ');
                    out.push_str(t);
                }
                Node::Element(e) => e.collect_text(out),
            }
        }
    }
}

impl Node {
    fn as_element(&self) -> Option<&Element> {
        match self {
            Node::Element(e) => Some(e),
            Node::Text(_) => None,
        }
    }
}

struct Descendants<'a> {
    stack: Vec<&'a Element>,
}

impl<'a> Iterator for Descendants<'a> {
    type Item = &'a Element;

    fn next(&mut self) -> Option<Self::Item> {
        let next = self.stack.pop()?;
        self.stack
            .extend(next.children.iter().rev().filter_map(Node::as_element));
        Some(next)
    }
}

const VOID_ELEMENTS: &[&str] = &[
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "param",
    "source", "track", "wbr",
];

/// Parse a document into a synthetic root element.
fn parse_document(html: &str) -> Result<Element> {
    let chars: Vec<char> = html.chars().collect();
    let mut pos = 0;
    let mut stack: Vec<Element> = vec![Element {
        name: String::new(),
        attrs: Vec::new(),
        children: Vec::new(),
    }];

    while pos < chars.len() {
        if chars[pos] == '<' {
            if chars[pos + 1..].starts_with(&['!', '-', '-']) {
                // Comment: forgivingly consumed to EOF when unterminated.
                pos = find_subsequence(&chars, pos + 3, &['-', '-', '>'])
                    .map(|p| p + 3)
                    .unwrap_or(chars.len());
                continue;
            }
            if matches!(chars.get(pos + 1), Some('!') | Some('?')) {
                // Doctype or processing instruction.
                pos = find_char(&chars, pos + 1, '>')
                    .ok_or_else(|| Error::Html("unterminated declaration".into()))?
                    + 1;
                continue;
            }
            if matches!(chars.get(pos + 1), Some(c) if c.is_ascii_alphabetic() || *c == '/') {
                pos = read_tag(&chars, pos, &mut stack)?;
                continue;
            }
        }
        // Text run up to the next possible tag opener.
        let start = pos;
        pos += 1;
        while pos < chars.len() && chars[pos] != '<' {
            pos += 1;
        }
        let text: String = chars[start..pos].iter().collect();
        let decoded = decode_text(&text);
        if !decoded.trim().is_empty() {
            stack
                .last_mut()
                .expect("root never popped")
                .children
                .push(Node::Text(decoded));
        }
    }

    // Fold any unclosed elements into their parents.
    while stack.len() > 1 {
        let elem = stack.pop().expect("len checked");
        stack
            .last_mut()
            .expect("root remains")
            .children
            .push(Node::Element(elem));
    }
    Ok(stack.pop().expect("root"))
}

/// Read one tag starting at `<`; returns the position just past `>`.
fn read_tag(chars: &[char], open: usize, stack: &mut Vec<Element>) -> Result<usize> {
    let mut pos = open + 1;
    let closing = chars[pos] == '/';
    if closing {
        pos += 1;
    }
    let name_start = pos;
    while pos < chars.len() && (chars[pos].is_ascii_alphanumeric() || chars[pos] == '-') {
        pos += 1;
    }
    let name: String = chars[name_start..pos].iter().collect::<String>().to_ascii_lowercase();
    if name.is_empty() {
        return Err(Error::Html(format!("malformed tag at offset {open}")));
    }

    let mut attrs = Vec::new();
    let mut self_closing = false;
    loop {
        while pos < chars.len() && chars[pos].is_whitespace() {
            pos += 1;
        }
        match chars.get(pos) {
            None => return Err(Error::Html(format!("unterminated tag <{name}"))),
            Some('>') => {
                pos += 1;
                break;
            }
            Some('/') => {
                self_closing = true;
                pos += 1;
            }
            Some(_) => {
                let (attr, next) = read_attribute(chars, pos, &name)?;
                attrs.push(attr);
                pos = next;
            }
        }
    }

    if closing {
        close_element(stack, &name);
        return Ok(pos);
    }

    // Raw-text elements: consume content without interpreting tags.
    if (name == "script" || name == "style") && !self_closing {
        let close_marker: Vec<char> = format!("</{name}").chars().collect();
        pos = find_subsequence(chars, pos, &close_marker).unwrap_or(chars.len());
        if pos < chars.len() {
            pos = find_char(chars, pos, '>').map(|p| p + 1).unwrap_or(chars.len());
        }
        return Ok(pos);
    }

    let element = Element {
        name: name.clone(),
        attrs,
        children: Vec::new(),
    };
    if self_closing || VOID_ELEMENTS.contains(&name.as_str()) {
        stack
            .last_mut()
            .expect("root never popped")
            .children
            .push(Node::Element(element));
    } else {
        stack.push(element);
    }
    Ok(pos)
}

fn read_attribute(chars: &[char], mut pos: usize, tag: &str) -> Result<((String, String), usize)> {
    let name_start = pos;
    while pos < chars.len() && !chars[pos].is_whitespace() && !matches!(chars[pos], '=' | '>' | '/')
    {
        pos += 1;
    }
    let name: String = chars[name_start..pos].iter().collect::<String>().to_ascii_lowercase();
    while pos < chars.len() && chars[pos].is_whitespace() {
        pos += 1;
    }
    if chars.get(pos) != Some(&'=') {
        return Ok(((name, String::new()), pos));
    }
    pos += 1;
    while pos < chars.len() && chars[pos].is_whitespace() {
        pos += 1;
    }
    match chars.get(pos) {
        Some(&quote) if quote == '"' || quote == '\'' => {
            let value_start = pos + 1;
            let end = find_char(chars, value_start, quote).ok_or_else(|| {
                Error::Html(format!("unterminated attribute value in <{tag}>"))
            })?;
            let value: String = chars[value_start..end].iter().collect();
            Ok(((name, decode_text(&value)), end + 1))
        }
        _ => {
            let value_start = pos;
            while pos < chars.len() && !chars[pos].is_whitespace() && chars[pos] != '>' {
                pos += 1;
            }
            let value: String = chars[value_start..pos].iter().collect();
            Ok(((name, decode_text(&value)), pos))
        }
    }
}

fn close_element(stack: &mut Vec<Element>, name: &str) {
    // Ignore a close tag with no matching open element.
    let Some(open_at) = stack.iter().rposition(|e| e.name == name) else {
        return;
    };
    if open_at == 0 {
        return;
    }
    while stack.len() > open_at {
        let elem = stack.pop().expect("bounded by open_at");
        stack
            .last_mut()
            .expect("open_at > 0")
            .children
            .push(Node::Element(elem));
    }
}

fn find_char(chars: &[char], from: usize, needle: char) -> Option<usize> {
    chars[from..].iter().position(|&c| c == needle).map(|p| from + p)
}

fn find_subsequence(chars: &[char], from: usize, needle: &[char]) -> Option<usize> {
    if needle.is_empty() || chars.len() < needle.len() {
        return None;
    }
    (from..=chars.len() - needle.len()).find(|&i| chars[i..i + needle.len()] == *needle)
}

/// Minimal entity decoding for text nodes and attribute values.
fn decode_text(s: &str) -> String {
    if !s.contains('&') {
        return s.to_string();
    }
    s.replace("&amp;", "&")
        .replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&#39;", "'")
        .replace("&apos;", "'")
        .replace("&nbsp;", " ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn review_block(rating: u8, date: &str, title: &str, body: &str) -> String {
        format!(
            r#"<div class="Dq9MAugU T870kzTX LnVzGwUB">
  <span class="ui_bubble_rating bubble_{}0"></span>
  <span class="_34Xs-BQm" title="{date}">reviewed</span>
  <div class="glasR4aX">{title}</div>
  <q class="IRsGHoPm">{body}</q>
</div>"#,
            rating
        )
    }

    fn page(blocks: &[String]) -> String {
        format!(
            "<html><body><div id=\"reviews\">{}</div></body></html>",
            blocks.join("\n")
        )
    }

    #[test]
    fn parses_complete_blocks_in_order() {
        let html = page(&[
            review_block(5, "May 12, 2019", "Lovely", "A great place to visit."),
            review_block(3, "June 1, 2019", "Mixed", "Nice but crowded."),
            review_block(1, "July 4, 2019", "Bad", "Really not clean."),
        ]);
        let parsed = parse_review_page(&html, &PageSelectors::default(), "fixture").unwrap();
        assert_eq!(parsed.skipped, 0);
        assert_eq!(parsed.reviews.len(), 3);
        assert_eq!(parsed.reviews[0].rating, 5);
        assert_eq!(parsed.reviews[0].date, "May 12, 2019");
        assert_eq!(parsed.reviews[1].title, "Mixed");
        assert_eq!(parsed.reviews[2].body, "Really not clean.");
        assert_eq!(parsed.reviews[2].source_page, "fixture");
    }

    #[test]
    fn empty_document_yields_empty_list() {
        let parsed = parse_review_page("", &PageSelectors::default(), "empty").unwrap();
        assert!(parsed.reviews.is_empty());
        assert_eq!(parsed.skipped, 0);
    }

    #[test]
    fn block_missing_date_is_skipped_and_counted() {
        let mut broken = review_block(4, "x", "t", "b");
        broken = broken.replace(r#"<span class="_34Xs-BQm" title="x">reviewed</span>"#, "");
        let html = page(&[review_block(5, "May 2019", "Ok", "Fine."), broken]);
        let parsed = parse_review_page(&html, &PageSelectors::default(), "p").unwrap();
        assert_eq!(parsed.reviews.len(), 1);
        assert_eq!(parsed.skipped, 1);
    }

    #[test]
    fn multiline_bodies_collapse_to_single_spaces() {
        let html = page(&[review_block(5, "d", "t", "line one\nline two\n  line three")]);
        let parsed = parse_review_page(&html, &PageSelectors::default(), "p").unwrap();
        assert_eq!(parsed.reviews[0].body, "line one line two line three");
        assert!(!parsed.reviews[0].body.contains('\n'));
    }

    #[test]
    fn bubble_decoding() {
        assert_eq!(decode_bubble_score("ui_bubble_rating bubble_50").unwrap(), 5);
        assert_eq!(decode_bubble_score("ui_bubble_rating bubble_10").unwrap(), 1);
        for r in 1..=5u8 {
            assert_eq!(decode_bubble_score(&format!("bubble_{}0", r)).unwrap(), r);
        }
        assert!(decode_bubble_score("ui_bubble_rating").is_err());
        assert!(decode_bubble_score("ui_bubble_rating bubble_55").is_err());
    }

    #[test]
    fn unterminated_attribute_is_a_structural_error() {
        let err = parse_review_page(
            "<div class=\"unclosed>text</div>",
            &PageSelectors::default(),
            "p",
        );
        assert!(matches!(err, Err(Error::Html(_))));
    }

    #[test]
    fn empty_selector_is_a_config_error() {
        let mut selectors = PageSelectors::default();
        selectors.date_class = String::new();
        let err = parse_review_page("<html></html>", &selectors, "p");
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn parse_is_deterministic() {
        let html = page(&[
            review_block(2, "a", "t1", "b1"),
            review_block(4, "b", "t2", "b2"),
        ]);
        let a = parse_review_page(&html, &PageSelectors::default(), "p").unwrap();
        let b = parse_review_page(&html, &PageSelectors::default(), "p").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn csv_round_trip_quoting() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let reviews = vec![RawReview {
            rating: 4,
            date: "May 12, 2019".into(),
            title: "Nice, \"mostly\"".into(),
            body: "Good walk, the \"pond\" was lovely".into(),
            source_page: "p".into(),
        }];
        let written = write_corpus_csv(&reviews, &path).unwrap();
        assert_eq!(written, 1);
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "Score,Date,Title,Review");
        let row = lines.next().unwrap();
        assert_eq!(
            row,
            "4,\"May 12, 2019\",\"Nice, \"\"mostly\"\"\",\"Good walk, the \"\"pond\"\" was lovely\""
        );
    }

    #[test]
    fn empty_review_list_writes_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        assert_eq!(write_corpus_csv(&[], &path).unwrap(), 0);
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "Score,Date,Title,Review\n");
    }
}
