//! Styled text extraction from PDF content streams.
//!
//! Walks each page's content stream (and any form XObjects it paints),
//! tracking the text and graphics matrices, so that every shown string keeps
//! its font, effective size and position. Shown strings are then folded into
//! line-level spans: consecutive strings on one baseline with the same style
//! become a single span.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use log::{debug, warn};
use lopdf::content::Content;
use lopdf::{Dictionary, Document, Encoding, Object, ObjectId};

use super::{doc_id_for, IngestError};
use crate::model::{font_name_is_bold, sizes_equal, DocumentText, TextSpan};
use crate::text::normalize_text;

/// Anything that can turn a PDF file into styled spans.
pub trait TextBackend: Send + Sync {
    fn extract(&self, path: &Path) -> Result<DocumentText, IngestError>;
}

/// Extracts with the default [`LopdfBackend`].
pub fn extract_document_text(path: &Path) -> Result<DocumentText, IngestError> {
    LopdfBackend::default().extract(path)
}

#[derive(Debug, Clone)]
pub struct LopdfBackend {
    /// Nesting limit for form XObjects.
    pub max_form_depth: usize,
}

impl Default for LopdfBackend {
    fn default() -> Self {
        LopdfBackend { max_form_depth: 8 }
    }
}

impl TextBackend for LopdfBackend {
    fn extract(&self, path: &Path) -> Result<DocumentText, IngestError> {
        let unreadable = |reason: String| IngestError::UnreadablePdf {
            path: path.to_path_buf(),
            reason,
        };
        let bytes = fs::read(path).map_err(|source| IngestError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if bytes.is_empty() {
            return Err(unreadable("empty file".into()));
        }
        let doc = Document::load_mem(&bytes).map_err(|e| unreadable(e.to_string()))?;
        if doc.is_encrypted() && !doc.was_encrypted() {
            return Err(unreadable("encrypted".into()));
        }

        let pages = doc.get_pages();
        if pages.is_empty() {
            return Err(unreadable("no pages".into()));
        }
        let page_count = pages.len() as u32;
        let mut spans = Vec::new();
        for (index, (_, page_id)) in pages.iter().enumerate() {
            let page_number = index as u32 + 1;
            let chunks = self.page_chunks(&doc, *page_id);
            let height = page_height(&doc, *page_id);
            spans.extend(chunks_to_spans(chunks, page_number, height));
        }
        if spans.is_empty() {
            return Err(IngestError::NoTextContent {
                path: path.to_path_buf(),
            });
        }
        DocumentText::new(doc_id_for(path), page_count, spans).map_err(|source| {
            IngestError::InvalidDocument {
                path: path.to_path_buf(),
                source,
            }
        })
    }
}

impl LopdfBackend {
    fn page_chunks(&self, doc: &Document, page_id: ObjectId) -> Vec<Chunk> {
        let mut fonts = FontTable::default();
        match doc.get_page_fonts(page_id) {
            Ok(map) => fonts.add_all(doc, map),
            Err(e) => debug!("page {page_id:?}: no fonts: {e}"),
        }
        let resources = page_resources(doc, page_id);
        let content = doc.get_page_content(page_id);
        let mut interp = Interpreter {
            doc,
            chunks: Vec::new(),
            max_depth: self.max_form_depth,
        };
        match Content::decode(&content) {
            Ok(content) => interp.run(&content.operations, &fonts, resources, Matrix::IDENTITY, 0),
            Err(e) => warn!("page {page_id:?}: undecodable content stream: {e}"),
        }
        interp.chunks
    }
}

fn page_height(doc: &Document, page_id: ObjectId) -> f64 {
    let mut node = doc.get_dictionary(page_id).ok();
    for _ in 0..32 {
        let Some(dict) = node else { break };
        if let Ok(Object::Array(b)) = dict.get(b"MediaBox").map(|o| deref(doc, o)) {
            if let (Some(y0), Some(y1)) = (b.get(1).and_then(number), b.get(3).and_then(number)) {
                return (y1 - y0).abs();
            }
        }
        node = dict
            .get(b"Parent")
            .ok()
            .and_then(|p| p.as_reference().ok())
            .and_then(|id| doc.get_dictionary(id).ok());
    }
    792.0
}

/// The page's resource dictionary, following inheritance.
fn page_resources(doc: &Document, page_id: ObjectId) -> Option<&Dictionary> {
    let (direct, ids) = doc.get_page_resources(page_id).ok()?;
    if let Some(d) = direct {
        return Some(d);
    }
    ids.into_iter().find_map(|id| doc.get_dictionary(id).ok())
}

fn deref<'a>(doc: &'a Document, obj: &'a Object) -> &'a Object {
    match obj {
        Object::Reference(id) => doc.get_object(*id).unwrap_or(obj),
        other => other,
    }
}

fn number(obj: &Object) -> Option<f64> {
    match obj {
        Object::Integer(i) => Some(*i as f64),
        Object::Real(r) => Some(*r as f64),
        _ => None,
    }
}

/// Affine matrix `[a b c d e f]` in PDF row-vector convention.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Matrix([f64; 6]);

impl Matrix {
    const IDENTITY: Matrix = Matrix([1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);

    fn translate(tx: f64, ty: f64) -> Matrix {
        Matrix([1.0, 0.0, 0.0, 1.0, tx, ty])
    }

    fn from_operands(ops: &[Object]) -> Option<Matrix> {
        if ops.len() < 6 {
            return None;
        }
        let mut m = [0.0; 6];
        for (slot, op) in m.iter_mut().zip(ops) {
            *slot = number(op)?;
        }
        Some(Matrix(m))
    }

    /// `self × other`: apply `self` first, then `other`.
    fn then(&self, other: &Matrix) -> Matrix {
        let [a1, b1, c1, d1, e1, f1] = self.0;
        let [a2, b2, c2, d2, e2, f2] = other.0;
        Matrix([
            a1 * a2 + b1 * c2,
            a1 * b2 + b1 * d2,
            c1 * a2 + d1 * c2,
            c1 * b2 + d1 * d2,
            e1 * a2 + f1 * c2 + e2,
            e1 * b2 + f1 * d2 + f2,
        ])
    }

    fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        let [a, b, c, d, e, f] = self.0;
        (a * x + c * y + e, b * x + d * y + f)
    }

    /// Length of the unit vertical vector after transformation.
    fn vertical_scale(&self) -> f64 {
        self.0[2].hypot(self.0[3])
    }
}

struct FontInfo<'a> {
    name: String,
    bold: bool,
    encoding: Option<Encoding<'a>>,
    two_byte: bool,
    widths: Widths,
}

#[derive(Default)]
struct Widths {
    first_char: u32,
    table: Vec<f64>,
    cid: BTreeMap<u32, f64>,
    default: f64,
    /// Glyph-space to text-space factor.
    scale: f64,
}

impl Widths {
    fn width(&self, code: u32) -> f64 {
        let w = code
            .checked_sub(self.first_char)
            .and_then(|i| self.table.get(i as usize).copied())
            .or_else(|| self.cid.get(&code).copied())
            .unwrap_or(self.default);
        w * self.scale
    }
}

#[derive(Default)]
struct FontTable<'a> {
    fonts: BTreeMap<Vec<u8>, std::rc::Rc<FontInfo<'a>>>,
}

impl<'a> FontTable<'a> {
    fn add_all(&mut self, doc: &'a Document, map: BTreeMap<Vec<u8>, &'a Dictionary>) {
        for (name, dict) in map {
            let info = font_info(doc, &name, dict);
            self.fonts.insert(name, std::rc::Rc::new(info));
        }
    }

    fn get(&self, name: &[u8]) -> Option<std::rc::Rc<FontInfo<'a>>> {
        self.fonts.get(name).cloned()
    }
}

fn font_info<'a>(doc: &'a Document, resource_name: &[u8], dict: &'a Dictionary) -> FontInfo<'a> {
    let base = dict
        .get(b"BaseFont")
        .ok()
        .map(|o| deref(doc, o))
        .and_then(|o| o.as_name().ok())
        .map(|n| String::from_utf8_lossy(n).into_owned())
        .unwrap_or_else(|| String::from_utf8_lossy(resource_name).into_owned());
    // subset fonts carry a six-letter tag: ABCDEF+Times-Bold
    let name = match base.split_once('+') {
        Some((tag, rest)) if tag.len() == 6 && tag.chars().all(|c| c.is_ascii_uppercase()) => {
            rest.to_string()
        }
        _ => base,
    };
    let subtype = dict
        .get(b"Subtype")
        .ok()
        .and_then(|o| o.as_name().ok())
        .unwrap_or(b"");
    let two_byte = subtype == b"Type0";
    let encoding = match dict.get_font_encoding(doc) {
        Ok(e) => Some(e),
        Err(e) => {
            debug!("font {name}: no usable encoding: {e}");
            None
        }
    };
    let widths = if two_byte {
        cid_widths(doc, dict)
    } else {
        simple_widths(doc, dict, &name, subtype)
    };
    FontInfo {
        bold: font_name_is_bold(&name),
        name,
        encoding,
        two_byte,
        widths,
    }
}

fn simple_widths(doc: &Document, dict: &Dictionary, name: &str, subtype: &[u8]) -> Widths {
    let first_char = dict.get(b"FirstChar").ok().and_then(number).unwrap_or(0.0) as u32;
    let table: Vec<f64> = dict
        .get(b"Widths")
        .ok()
        .map(|o| deref(doc, o))
        .and_then(|o| o.as_array().ok())
        .map(|a| {
            a.iter()
                .map(|w| number(deref(doc, w)).unwrap_or(0.0))
                .collect()
        })
        .unwrap_or_default();
    let scale = if subtype == b"Type3" {
        dict.get(b"FontMatrix")
            .ok()
            .and_then(|o| o.as_array().ok())
            .and_then(|a| a.first())
            .and_then(number)
            .unwrap_or(0.001)
    } else {
        0.001
    };
    let default = if name.to_ascii_lowercase().contains("courier") {
        600.0
    } else {
        500.0
    };
    Widths {
        first_char,
        table,
        cid: BTreeMap::new(),
        default,
        scale,
    }
}

fn cid_widths(doc: &Document, dict: &Dictionary) -> Widths {
    let mut widths = Widths {
        default: 1000.0,
        scale: 0.001,
        ..Default::default()
    };
    let Some(descendant) = dict
        .get(b"DescendantFonts")
        .ok()
        .map(|o| deref(doc, o))
        .and_then(|o| o.as_array().ok())
        .and_then(|a| a.first())
        .map(|o| deref(doc, o))
        .and_then(|o| o.as_dict().ok())
    else {
        return widths;
    };
    if let Some(dw) = descendant.get(b"DW").ok().and_then(number) {
        widths.default = dw;
    }
    let Some(w) = descendant
        .get(b"W")
        .ok()
        .map(|o| deref(doc, o))
        .and_then(|o| o.as_array().ok())
    else {
        return widths;
    };
    let mut i = 0;
    while i < w.len() {
        let Some(first) = number(deref(doc, &w[i])) else {
            break;
        };
        match w.get(i + 1).map(|o| deref(doc, o)) {
            Some(Object::Array(list)) => {
                for (k, width) in list.iter().enumerate() {
                    if let Some(width) = number(deref(doc, width)) {
                        widths.cid.insert(first as u32 + k as u32, width);
                    }
                }
                i += 2;
            }
            Some(last) => {
                let (Some(last), Some(width)) = (
                    number(last),
                    w.get(i + 2).and_then(|o| number(deref(doc, o))),
                ) else {
                    break;
                };
                for code in first as u32..=last as u32 {
                    widths.cid.insert(code, width);
                }
                i += 3;
            }
            None => break,
        }
    }
    widths
}

/// One shown string with its resolved style and device-space extent.
#[derive(Debug, Clone)]
struct Chunk {
    text: String,
    font_name: String,
    bold: bool,
    size: f64,
    x_start: f64,
    x_end: f64,
    y: f64,
}

#[derive(Clone)]
struct GraphicsState<'a> {
    ctm: Matrix,
    font: Option<std::rc::Rc<FontInfo<'a>>>,
    font_size: f64,
    char_spacing: f64,
    word_spacing: f64,
    horizontal_scale: f64,
    leading: f64,
    rise: f64,
}

impl GraphicsState<'_> {
    fn new(ctm: Matrix) -> Self {
        GraphicsState {
            ctm,
            font: None,
            font_size: 0.0,
            char_spacing: 0.0,
            word_spacing: 0.0,
            horizontal_scale: 1.0,
            leading: 0.0,
            rise: 0.0,
        }
    }
}

/// Large negative `TJ` adjustments stand in for word spaces.
const TJ_SPACE_THRESHOLD: f64 = -200.0;

struct Interpreter<'a> {
    doc: &'a Document,
    chunks: Vec<Chunk>,
    max_depth: usize,
}

impl<'a> Interpreter<'a> {
    fn run(
        &mut self,
        ops: &[lopdf::content::Operation],
        fonts: &FontTable<'a>,
        resources: Option<&'a Dictionary>,
        ctm: Matrix,
        depth: usize,
    ) {
        let mut gs = GraphicsState::new(ctm);
        let mut stack: Vec<GraphicsState<'a>> = Vec::new();
        let mut tm = Matrix::IDENTITY;
        let mut tlm = Matrix::IDENTITY;

        for op in ops {
            let args = &op.operands;
            let num = |i: usize| args.get(i).and_then(number).unwrap_or(0.0);
            match op.operator.as_str() {
                "q" => stack.push(gs.clone()),
                "Q" => {
                    if let Some(saved) = stack.pop() {
                        gs = saved;
                    }
                }
                "cm" => {
                    if let Some(m) = Matrix::from_operands(args) {
                        gs.ctm = m.then(&gs.ctm);
                    }
                }
                "BT" => {
                    tm = Matrix::IDENTITY;
                    tlm = Matrix::IDENTITY;
                }
                "Tf" => {
                    gs.font = args
                        .first()
                        .and_then(|o| o.as_name().ok())
                        .and_then(|n| fonts.get(n));
                    gs.font_size = num(1);
                }
                "Tc" => gs.char_spacing = num(0),
                "Tw" => gs.word_spacing = num(0),
                "Tz" => gs.horizontal_scale = num(0) / 100.0,
                "TL" => gs.leading = num(0),
                "Ts" => gs.rise = num(0),
                "Td" => {
                    tlm = Matrix::translate(num(0), num(1)).then(&tlm);
                    tm = tlm;
                }
                "TD" => {
                    gs.leading = -num(1);
                    tlm = Matrix::translate(num(0), num(1)).then(&tlm);
                    tm = tlm;
                }
                "Tm" => {
                    if let Some(m) = Matrix::from_operands(args) {
                        tlm = m;
                        tm = m;
                    }
                }
                "T*" => {
                    tlm = Matrix::translate(0.0, -gs.leading).then(&tlm);
                    tm = tlm;
                }
                "Tj" => {
                    if let Some(bytes) = args.first().and_then(|o| o.as_str().ok()) {
                        self.show(&gs, &mut tm, bytes, false);
                    }
                }
                "'" | "\"" => {
                    if op.operator == "\"" {
                        gs.word_spacing = num(0);
                        gs.char_spacing = num(1);
                    }
                    tlm = Matrix::translate(0.0, -gs.leading).then(&tlm);
                    tm = tlm;
                    if let Some(bytes) = args.last().and_then(|o| o.as_str().ok()) {
                        self.show(&gs, &mut tm, bytes, false);
                    }
                }
                "TJ" => {
                    let Some(items) = args.first().and_then(|o| o.as_array().ok()) else {
                        continue;
                    };
                    let mut pending_space = false;
                    for item in items {
                        if let Some(adjust) = number(item) {
                            let tx = -adjust / 1000.0 * gs.font_size * gs.horizontal_scale;
                            tm = Matrix::translate(tx, 0.0).then(&tm);
                            pending_space |= adjust <= TJ_SPACE_THRESHOLD;
                        } else if let Ok(bytes) = item.as_str() {
                            self.show(&gs, &mut tm, bytes, pending_space);
                            pending_space = false;
                        }
                    }
                }
                "Do" if depth < self.max_depth => {
                    if let Some(name) = args.first().and_then(|o| o.as_name().ok()) {
                        self.paint_form(name, fonts, resources, &gs, depth);
                    }
                }
                _ => {}
            }
        }
    }

    fn paint_form(
        &mut self,
        name: &[u8],
        fonts: &FontTable<'a>,
        resources: Option<&'a Dictionary>,
        gs: &GraphicsState<'a>,
        depth: usize,
    ) {
        let doc = self.doc;
        let Some(stream) = resources
            .and_then(|r| r.get(b"XObject").ok())
            .map(|o| deref(doc, o))
            .and_then(|o| o.as_dict().ok())
            .and_then(|x| x.get(name).ok())
            .map(|o| deref(doc, o))
            .and_then(|o| o.as_stream().ok())
        else {
            return;
        };
        if stream
            .dict
            .get(b"Subtype")
            .ok()
            .and_then(|o| o.as_name().ok())
            != Some(b"Form")
        {
            return;
        }
        let matrix = stream
            .dict
            .get(b"Matrix")
            .ok()
            .and_then(|o| o.as_array().ok())
            .and_then(|a| Matrix::from_operands(a))
            .unwrap_or(Matrix::IDENTITY);
        let form_resources = stream
            .dict
            .get(b"Resources")
            .ok()
            .map(|o| deref(doc, o))
            .and_then(|o| o.as_dict().ok());

        let mut form_fonts = FontTable {
            fonts: fonts.fonts.clone(),
        };
        if let Some(font_dict) = form_resources
            .and_then(|r| r.get(b"Font").ok())
            .map(|o| deref(doc, o))
            .and_then(|o| o.as_dict().ok())
        {
            let map = font_dict
                .iter()
                .filter_map(|(k, v)| deref(doc, v).as_dict().ok().map(|d| (k.clone(), d)))
                .collect();
            form_fonts.add_all(doc, map);
        }
        let content = stream
            .decompressed_content()
            .unwrap_or_else(|_| stream.content.clone());
        let Ok(content) = Content::decode(&content) else {
            return;
        };
        let ctm = matrix.then(&gs.ctm);
        self.run(
            &content.operations,
            &form_fonts,
            form_resources.or(resources),
            ctm,
            depth + 1,
        );
    }

    fn show(&mut self, gs: &GraphicsState<'a>, tm: &mut Matrix, bytes: &[u8], space_before: bool) {
        let Some(font) = gs.font.clone() else { return };
        let trm = tm.then(&gs.ctm);
        let size = (gs.font_size * trm.vertical_scale()).abs();
        let (x_start, y) = trm.apply(0.0, gs.rise);

        let codes: Vec<u32> = if font.two_byte {
            bytes
                .chunks(2)
                .map(|c| c.iter().fold(0u32, |acc, b| acc << 8 | *b as u32))
                .collect()
        } else {
            bytes.iter().map(|b| *b as u32).collect()
        };
        let advance: f64 = codes
            .iter()
            .map(|&code| {
                let spacing = if !font.two_byte && code == 32 {
                    gs.word_spacing
                } else {
                    0.0
                };
                (font.widths.width(code) * gs.font_size + gs.char_spacing + spacing)
                    * gs.horizontal_scale
            })
            .sum();
        *tm = Matrix::translate(advance, 0.0).then(tm);
        let (x_end, _) = tm.then(&gs.ctm).apply(0.0, gs.rise);

        let mut text = match &font.encoding {
            Some(enc) => Document::decode_text(enc, bytes).unwrap_or_default(),
            None => String::new(),
        };
        if text.is_empty() || size <= 0.0 || !size.is_finite() {
            return;
        }
        if space_before {
            text.insert(0, ' ');
        }
        self.chunks.push(Chunk {
            text,
            font_name: font.name.clone(),
            bold: font.bold,
            size,
            x_start,
            x_end,
            y,
        });
    }
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

/// Folds shown strings into line-level spans in content-stream order.
fn chunks_to_spans(chunks: Vec<Chunk>, page: u32, page_height: f64) -> Vec<TextSpan> {
    let mut merged: Vec<Chunk> = Vec::new();
    for chunk in chunks {
        if let Some(cur) = merged.last_mut() {
            let tolerance = 0.25 * cur.size.max(chunk.size);
            let same_line = (chunk.y - cur.y).abs() <= tolerance;
            let gap = chunk.x_start - cur.x_end;
            let same_style = cur.font_name == chunk.font_name
                && cur.bold == chunk.bold
                && sizes_equal(cur.size, chunk.size);
            if same_line && same_style && gap > -0.5 * cur.size && gap < 3.0 * cur.size {
                if gap > 0.15 * cur.size && !cur.text.ends_with(' ') && !chunk.text.starts_with(' ')
                {
                    cur.text.push(' ');
                }
                cur.text.push_str(&chunk.text);
                cur.x_end = chunk.x_end;
                continue;
            }
        }
        merged.push(chunk);
    }

    merged
        .into_iter()
        .filter_map(|c| {
            let text = normalize_text(&c.text);
            (!text.is_empty()).then_some((text, c))
        })
        .enumerate()
        .map(|(order, (text, c))| TextSpan {
            text,
            page,
            order: order as u32,
            font_name: c.font_name,
            font_size: round2(c.size),
            bold: c.bold,
            baseline_y: round2(page_height - c.y),
        })
        .collect()
}
