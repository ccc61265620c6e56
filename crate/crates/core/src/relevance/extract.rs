//! Main-content extraction: strips navigation, chrome, and script subtrees
//! from a page so term vectors are built over article text only.

use scraper::{Html, Node};

/// Replaceable boilerplate remover. The default implementation is
/// [`DensityExtractor`]; callers needing a different extraction strategy plug
/// in their own.
pub trait TextExtractor: Send + Sync {
    fn extract(&self, html: &str) -> String;
}

/// Subtrees that never contribute content text.
const DROP_TAGS: &[&str] = &[
    "script", "style", "noscript", "template", "nav", "header", "footer", "aside", "form",
    "iframe", "svg", "head", "select", "button",
];

/// Elements that open a new text block; text under inline descendants belongs
/// to the nearest enclosing block.
const BLOCK_TAGS: &[&str] = &[
    "html",
    "body",
    "main",
    "article",
    "section",
    "div",
    "p",
    "h1",
    "h2",
    "h3",
    "h4",
    "h5",
    "h6",
    "li",
    "ul",
    "ol",
    "table",
    "tbody",
    "thead",
    "tr",
    "td",
    "th",
    "blockquote",
    "pre",
    "figure",
    "figcaption",
    "dl",
    "dt",
    "dd",
];

#[derive(Default)]
struct Block {
    text: String,
    inline_tags: usize,
}

/// Keeps blocks whose text density — text length over one plus the number of
/// inline markup tags in the block — exceeds `min_density`. A block crowded
/// with links (navigation, link farms) has low density and is dropped; running
/// article prose has high density and is kept. When no block qualifies, all
/// visible text is returned so extraction never fails.
#[derive(Debug, Clone)]
pub struct DensityExtractor {
    pub min_density: f64,
}

impl Default for DensityExtractor {
    fn default() -> Self {
        DensityExtractor { min_density: 10.0 }
    }
}

impl DensityExtractor {
    fn collect_blocks(node: ego_tree::NodeRef<'_, Node>, blocks: &mut Vec<Block>, current: usize) {
        for child in node.children() {
            match child.value() {
                Node::Element(el) => {
                    let name = el.name();
                    if DROP_TAGS.contains(&name) {
                        continue;
                    }
                    if BLOCK_TAGS.contains(&name) {
                        blocks.push(Block::default());
                        let idx = blocks.len() - 1;
                        Self::collect_blocks(child, blocks, idx);
                    } else {
                        blocks[current].inline_tags += 1;
                        Self::collect_blocks(child, blocks, current);
                    }
                }
                Node::Text(t) => {
                    blocks[current].text.push_str(t);
                }
                _ => {}
            }
        }
    }
}

fn normalize_ws(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

impl TextExtractor for DensityExtractor {
    fn extract(&self, html: &str) -> String {
        let doc = Html::parse_document(html);
        let mut blocks = vec![Block::default()];
        DensityExtractor::collect_blocks(doc.tree.root(), &mut blocks, 0);

        let kept: Vec<String> = blocks
            .iter()
            .filter_map(|b| {
                let text = normalize_ws(&b.text);
                if text.is_empty() {
                    return None;
                }
                let density = text.chars().count() as f64 / (1.0 + b.inline_tags as f64);
                (density >= self.min_density).then_some(text)
            })
            .collect();

        if kept.is_empty() {
            // fall back to all visible text
            return normalize_ws(
                &blocks.iter().map(|b| b.text.as_str()).collect::<Vec<_>>().join(" "),
            );
        }
        kept.join("\n")
    }
}

/// Extracts main content with the default density extractor.
pub fn extract_main_text(html: &str) -> String {
    DensityExtractor::default().extract(html)
}
