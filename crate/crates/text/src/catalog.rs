//! The text transform catalog.

use std::path::Path;
use std::sync::{Arc, OnceLock};

use polyaug_core::intensity::fraction;
use polyaug_core::{lambda, Augmenter, Catalog, Error, Lambdas, Modality, OpDef, ParamDecl, Params, Result, Shape};
use serde_json::{json, Value};

use crate::doc::TextDoc;
use crate::ops::{self, Case, ContractionMode, Granularity, Typo};
use crate::tables::{self, CharTable, WordTable};

pub struct TextModality;

#[derive(Clone, Default)]
pub struct TextEnv {
    pub lambdas: Arc<Lambdas<TextDoc>>,
}

impl TextEnv {
    pub fn with_lambdas(lambdas: Lambdas<TextDoc>) -> Self {
        Self { lambdas: Arc::new(lambdas) }
    }
}

impl Modality for TextModality {
    type Datum = TextDoc;
    type Env = TextEnv;
    const NAME: &'static str = "text";

    fn shape(doc: &TextDoc) -> Shape {
        Shape::Text { chars: doc.char_count(), words: doc.word_count() }
    }
}

pub type TextOp = OpDef<TextModality>;

pub fn catalog() -> &'static Catalog<TextModality> {
    static CATALOG: OnceLock<Catalog<TextModality>> = OnceLock::new();
    CATALOG.get_or_init(|| Catalog::new(ops()))
}

pub fn augmenter(env: &TextEnv) -> Augmenter<'_, TextModality> {
    Augmenter::new(catalog(), env)
}

/// Resolves the optional `table` param to a loaded table or the bundled one.
enum Table<T: 'static> {
    Bundled(&'static T),
    Loaded(T),
}

impl<T> std::ops::Deref for Table<T> {
    type Target = T;
    fn deref(&self) -> &T {
        match self {
            Table::Bundled(t) => t,
            Table::Loaded(t) => t,
        }
    }
}

fn char_table(p: &Params, bundled: fn() -> &'static CharTable) -> Result<Table<CharTable>> {
    Ok(match p.opt_str("table")? {
        Some(path) => Table::Loaded(CharTable::load(Path::new(path))?),
        None => Table::Bundled(bundled()),
    })
}

fn word_table(p: &Params, bundled: fn() -> &'static WordTable) -> Result<Table<WordTable>> {
    Ok(match p.opt_str("table")? {
        Some(path) => Table::Loaded(WordTable::load(Path::new(path))?),
        None => Table::Bundled(bundled()),
    })
}

fn table_param() -> ParamDecl {
    ParamDecl::text("table", "").optional()
}

fn typo_kinds(p: &Params) -> Result<Vec<Typo>> {
    let Some(v) = p.json("kinds").filter(|v| !v.is_null()) else {
        return Ok(Typo::ALL.to_vec());
    };
    let items = v.as_array().ok_or_else(|| Error::invalid("simulate_typos", "`kinds` must be a list"))?;
    let kinds = items
        .iter()
        .map(|k| k.as_str().ok_or_else(|| Error::invalid("simulate_typos", "`kinds` entries must be strings")).and_then(Typo::parse))
        .collect::<Result<Vec<_>>>()?;
    if kinds.is_empty() {
        return Err(Error::invalid("simulate_typos", "`kinds` must not be empty"));
    }
    Ok(kinds)
}

fn mapping(p: &Params) -> Result<WordTable> {
    let obj = p
        .json("mapping")
        .and_then(Value::as_object)
        .ok_or_else(|| Error::invalid("replace_words", "`mapping` must be an object of strings"))?;
    let pairs = obj
        .iter()
        .map(|(k, v)| match v.as_str() {
            Some(s) => Ok((k.to_lowercase(), s.to_string())),
            None => Err(Error::invalid("replace_words", format!("mapping for `{k}` is not a string"))),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WordTable::from_pairs(pairs))
}

fn style(p: &Params) -> Result<Option<usize>> {
    match p.str("style")? {
        "random" => Ok(None),
        name => tables::fun_fonts()
            .style_index(name)
            .map(Some)
            .ok_or_else(|| Error::invalid("replace_fun_fonts", format!("unknown style `{name}`"))),
    }
}

fn insertion_params(chars: &str) -> Vec<ParamDecl> {
    vec![
        ParamDecl::choice("granularity", &["all", "word"], "all"),
        ParamDecl::float("aug_p", 0.0, 1.0, 1.0),
        ParamDecl::int("cadence", 1, 1000, 1),
        ParamDecl::text("chars", chars),
    ]
}

fn insert(doc: &TextDoc, p: &Params, rng: &mut polyaug_core::Rng) -> Result<TextDoc> {
    let chars: Vec<char> = p.str("chars")?.chars().collect();
    let g = Granularity::parse(p.str("granularity")?)?;
    ops::insert_chars(doc.as_str(), g, p.f64("aug_p")?, p.usize("cadence")?, &chars, rng).map(TextDoc)
}

fn insertion_intensity(p: &Params) -> Result<f64> {
    Ok(fraction(p.f64("aug_p")? / p.f64("cadence")?))
}

fn non_empty_chars(p: &Params) -> Result<()> {
    if p.str("chars")?.is_empty() {
        Err(Error::invalid("insert_chars", "`chars` must not be empty"))
    } else {
        Ok(())
    }
}

const STYLES: &[&str] = &[
    "random", "bold", "italic", "bold_italic", "script", "bold_script", "fraktur", "double_struck", "sans", "sans_bold",
    "sans_italic", "monospace",
];

fn ops() -> Vec<TextOp> {
    vec![
        TextOp::new("apply_lambda", |doc, p, ctx| ctx.env.lambdas.call(doc, p, &mut ctx.rng))
            .params(lambda::schema())
            .intensity(|p, _, _| lambda::intensity(p))
            .check(|p, env| env.lambdas.check(p)),
        TextOp::new("change_case", |doc, p, ctx| {
            Ok(TextDoc(ops::change_case(doc.as_str(), Case::parse(p.str("case")?)?, p.f64("aug_word_p")?, &mut ctx.rng)))
        })
        .param(ParamDecl::choice("case", &["upper", "lower", "title", "random"], "upper"))
        .param(ParamDecl::float("aug_word_p", 0.0, 1.0, 1.0))
        .intensity(|p, _, _| Ok(fraction(p.f64("aug_word_p")?))),
        TextOp::new("contractions", |doc, p, ctx| {
            let mode = match p.str("mode")? {
                "expand" => ContractionMode::Expand,
                _ => ContractionMode::Contract,
            };
            let table = word_table(p, tables::contractions)?;
            Ok(TextDoc(ops::contractions(doc.as_str(), &table, mode, p.f64("aug_p")?, &mut ctx.rng)))
        })
        .param(ParamDecl::choice("mode", &["contract", "expand"], "contract"))
        .param(ParamDecl::float("aug_p", 0.0, 1.0, 0.3))
        .param(table_param())
        .check(|p, _| word_table(p, tables::contractions).map(|_| ()))
        .intensity(|p, _, _| Ok(fraction(p.f64("aug_p")?))),
        TextOp::new("get_baseline", |doc, _, _| Ok(TextDoc(ops::get_baseline(doc.as_str())))).intensity(|_, _, _| Ok(0.0)),
        TextOp::new("insert_punctuation_chars", |doc, p, ctx| insert(doc, p, &mut ctx.rng))
            .params(insertion_params(".,!?;:-'\""))
            .check(|p, _| non_empty_chars(p))
            .intensity(|p, _, _| insertion_intensity(p)),
        TextOp::new("insert_whitespace_chars", |doc, p, ctx| insert(doc, p, &mut ctx.rng))
            .params(insertion_params(" "))
            .check(|p, _| non_empty_chars(p))
            .intensity(|p, _, _| insertion_intensity(p)),
        TextOp::new("insert_zero_width_chars", |doc, p, ctx| insert(doc, p, &mut ctx.rng))
            .params(insertion_params(&ops::ZERO_WIDTH.iter().collect::<String>()))
            .check(|p, _| non_empty_chars(p))
            .intensity(|p, _, _| insertion_intensity(p)),
        TextOp::new("merge_words", |doc, p, ctx| Ok(TextDoc(ops::merge_words(doc.as_str(), p.f64("aug_word_p")?, &mut ctx.rng))))
            .param(ParamDecl::float("aug_word_p", 0.0, 1.0, 0.3))
            .intensity(|p, _, _| Ok(fraction(p.f64("aug_word_p")?))),
        TextOp::new("replace_bidirectional", |doc, _, _| Ok(TextDoc(ops::replace_bidirectional(doc.as_str())))),
        TextOp::new("replace_fun_fonts", |doc, p, ctx| {
            Ok(TextDoc(ops::replace_fun_fonts(
                doc.as_str(),
                tables::fun_fonts(),
                style(p)?,
                Granularity::parse(p.str("granularity")?)?,
                p.f64("aug_p")?,
                p.bool("vary_fonts")?,
                &mut ctx.rng,
            )))
        })
        .param(ParamDecl::choice("style", STYLES, "random"))
        .param(ParamDecl::choice("granularity", &["all", "word", "char"], "all"))
        .param(ParamDecl::float("aug_p", 0.0, 1.0, 0.3))
        .param(ParamDecl::boolean("vary_fonts", false))
        .intensity(|p, _, _| {
            Ok(if p.str("granularity")? == "all" { 100.0 } else { fraction(p.f64("aug_p")?) })
        }),
        TextOp::new("replace_similar_chars", |doc, p, ctx| {
            let table = char_table(p, tables::similar_chars)?;
            Ok(TextDoc(ops::replace_chars(doc.as_str(), p.f64("aug_char_p")?, &table, &mut ctx.rng)))
        })
        .param(ParamDecl::float("aug_char_p", 0.0, 1.0, 0.3))
        .param(table_param())
        .check(|p, _| char_table(p, tables::similar_chars).map(|_| ()))
        .intensity(|p, _, _| Ok(fraction(p.f64("aug_char_p")?))),
        TextOp::new("replace_similar_unicode_chars", |doc, p, ctx| {
            let table = char_table(p, tables::homoglyphs)?;
            Ok(TextDoc(ops::replace_chars(doc.as_str(), p.f64("aug_char_p")?, &table, &mut ctx.rng)))
        })
        .param(ParamDecl::float("aug_char_p", 0.0, 1.0, 0.3))
        .param(table_param())
        .check(|p, _| char_table(p, tables::homoglyphs).map(|_| ()))
        .intensity(|p, _, _| Ok(fraction(p.f64("aug_char_p")?))),
        TextOp::new("replace_upside_down", |doc, _, _| Ok(TextDoc(ops::replace_upside_down(doc.as_str(), tables::upside_down())))),
        TextOp::new("replace_words", |doc, p, ctx| {
            let table = mapping(p)?;
            Ok(TextDoc(ops::replace_words(doc.as_str(), &table, p.f64("aug_word_p")?, p.bool("ignore_case")?, &mut ctx.rng)))
        })
        .param(ParamDecl::json("mapping", json!({})))
        .param(ParamDecl::float("aug_word_p", 0.0, 1.0, 1.0))
        .param(ParamDecl::boolean("ignore_case", true))
        .check(|p, _| mapping(p).map(|_| ()))
        .intensity(|p, _, _| {
            let empty = p.json("mapping").and_then(Value::as_object).is_some_and(|m| m.is_empty());
            Ok(if empty { 0.0 } else { fraction(p.f64("aug_word_p")?) })
        }),
        TextOp::new("simulate_typos", |doc, p, ctx| {
            Ok(TextDoc(ops::simulate_typos(doc.as_str(), p.f64("aug_word_p")?, &typo_kinds(p)?, tables::keyboard(), &mut ctx.rng)))
        })
        .param(ParamDecl::float("aug_word_p", 0.0, 1.0, 0.3))
        .param(ParamDecl::json("kinds", json!(["substitution", "transposition", "deletion", "insertion"])))
        .check(|p, _| typo_kinds(p).map(|_| ()))
        .intensity(|p, _, _| Ok(fraction(p.f64("aug_word_p")?))),
        TextOp::new("split_words", |doc, p, ctx| Ok(TextDoc(ops::split_words(doc.as_str(), p.f64("aug_word_p")?, &mut ctx.rng))))
            .param(ParamDecl::float("aug_word_p", 0.0, 1.0, 0.3))
            .intensity(|p, _, _| Ok(fraction(p.f64("aug_word_p")?))),
        TextOp::new("swap_gendered_words", |doc, p, ctx| {
            let table = word_table(p, tables::gendered)?;
            Ok(TextDoc(ops::replace_words(doc.as_str(), &table, p.f64("aug_word_p")?, true, &mut ctx.rng)))
        })
        .param(ParamDecl::float("aug_word_p", 0.0, 1.0, 1.0))
        .param(table_param())
        .check(|p, _| word_table(p, tables::gendered).map(|_| ()))
        .intensity(|p, _, _| Ok(fraction(p.f64("aug_word_p")?))),
    ]
}

/// Params under which a transform returns its input unchanged, for ops that
/// have such a setting.
pub fn identity_params(name: &str) -> Option<Params> {
    let p = |v: Value| -> Params { serde_json::from_value(v).expect("object literal") };
    Some(match name {
        "apply_lambda" => p(json!({"aug_function": "identity"})),
        "change_case" | "merge_words" | "simulate_typos" | "split_words" | "swap_gendered_words" => {
            p(json!({"aug_word_p": 0.0}))
        }
        "contractions" => p(json!({"aug_p": 0.0})),
        "get_baseline" => Params::new(),
        "insert_punctuation_chars" | "insert_whitespace_chars" | "insert_zero_width_chars" => p(json!({"aug_p": 0.0})),
        "replace_fun_fonts" => p(json!({"granularity": "word", "aug_p": 0.0})),
        "replace_similar_chars" | "replace_similar_unicode_chars" => p(json!({"aug_char_p": 0.0})),
        "replace_words" => p(json!({"mapping": {}})),
        _ => return None,
    })
}
