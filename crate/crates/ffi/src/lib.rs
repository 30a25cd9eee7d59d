//! C ABI over the phoenix engine.
//!
//! Every function returns a [`PhxStatus`]. Outputs are written through
//! pointer arguments only on success. Strings returned to C are
//! NUL-terminated UTF-8 owned by the caller and released with
//! [`phx_string_free`]; byte buffers are released with [`phx_bytes_free`].
//! The message for the most recent failure on the calling thread is
//! available from [`phx_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use phoenix_core::ast::{parse_latex, render_latex, render_mathml, MathmlProfile, RenderOptions};
use phoenix_core::edit::{apply_command, parse_command, EditError};
use phoenix_core::export::{export, ExportError, ExportFormat};
use phoenix_core::spoken::{parse_spoken, Lexicon, SpokenError};
use phoenix_core::workspace::{self, Point, Workspace, WorkspaceError};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhxStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    NoMathFound = 3,
    ParseError = 4,
    InvalidExpression = 5,
    NotACommand = 6,
    TargetNotFound = 7,
    AmbiguousTarget = 8,
    InvalidCommand = 9,
    NotFound = 10,
    InvalidDocument = 11,
    EmptyNode = 12,
    UnsupportedInProfile = 13,
    InvalidArgument = 14,
    Io = 15,
    Panic = 16,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhxExportFormat {
    Latex = 0,
    WordMathml = 1,
    PrintHtml = 2,
}

/// Opaque lexicon handle.
pub struct PhxLexicon(Lexicon);

/// Opaque workspace handle.
pub struct PhxWorkspace(Workspace);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Fail(PhxStatus, String);

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PhxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            PhxStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            PhxStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(PhxStatus::NullArgument, "null string argument".into()));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Fail(PhxStatus::InvalidUtf8, e.to_string()))
}

unsafe fn out<T>(p: *mut T) -> Result<&'static mut T, Fail> {
    p.as_mut().ok_or_else(|| Fail(PhxStatus::NullArgument, "null output pointer".into()))
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

fn spoken_fail(e: SpokenError) -> Fail {
    let status = match e {
        SpokenError::NoMathFound => PhxStatus::NoMathFound,
        SpokenError::Syntax { .. } => PhxStatus::ParseError,
        SpokenError::Invalid(_) => PhxStatus::InvalidExpression,
    };
    Fail(status, e.to_string())
}

fn edit_fail(e: EditError) -> Fail {
    let status = match e {
        EditError::NotACommand => PhxStatus::NotACommand,
        EditError::TargetNotFound => PhxStatus::TargetNotFound,
        EditError::AmbiguousTarget { .. } => PhxStatus::AmbiguousTarget,
        EditError::InvalidCommand(_) => PhxStatus::InvalidCommand,
        EditError::Invalid(_) => PhxStatus::InvalidExpression,
    };
    Fail(status, e.to_string())
}

fn workspace_fail(e: WorkspaceError) -> Fail {
    let status = match e {
        WorkspaceError::NodeNotFound(_)
        | WorkspaceError::ParentNotFound(_)
        | WorkspaceError::EquationNotFound(_)
        | WorkspaceError::ParentEquationNotFound(_) => PhxStatus::NotFound,
        WorkspaceError::Invalid(_) => PhxStatus::InvalidExpression,
        WorkspaceError::MalformedDocument { .. } | WorkspaceError::SchemaVersionUnsupported(_) => PhxStatus::InvalidDocument,
        _ => PhxStatus::InvalidArgument,
    };
    Fail(status, e.to_string())
}

fn latex_fail(e: impl std::fmt::Display) -> Fail {
    Fail(PhxStatus::ParseError, e.to_string())
}

/// Message for the last failure on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn phx_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

fn status_from(v: i32) -> Option<PhxStatus> {
    const ALL: [PhxStatus; 17] = [
        PhxStatus::Ok,
        PhxStatus::NullArgument,
        PhxStatus::InvalidUtf8,
        PhxStatus::NoMathFound,
        PhxStatus::ParseError,
        PhxStatus::InvalidExpression,
        PhxStatus::NotACommand,
        PhxStatus::TargetNotFound,
        PhxStatus::AmbiguousTarget,
        PhxStatus::InvalidCommand,
        PhxStatus::NotFound,
        PhxStatus::InvalidDocument,
        PhxStatus::EmptyNode,
        PhxStatus::UnsupportedInProfile,
        PhxStatus::InvalidArgument,
        PhxStatus::Io,
        PhxStatus::Panic,
    ];
    ALL.iter().copied().find(|s| *s as i32 == v)
}

/// Static, NUL-terminated name of a status code.
#[no_mangle]
pub extern "C" fn phx_status_name(status: i32) -> *const c_char {
    let name: &'static CStr = match status_from(status) {
        None => c"unknown",
        Some(PhxStatus::Ok) => c"ok",
        Some(PhxStatus::NullArgument) => c"null_argument",
        Some(PhxStatus::InvalidUtf8) => c"invalid_utf8",
        Some(PhxStatus::NoMathFound) => c"no_math_found",
        Some(PhxStatus::ParseError) => c"parse_error",
        Some(PhxStatus::InvalidExpression) => c"invalid_expression",
        Some(PhxStatus::NotACommand) => c"not_a_command",
        Some(PhxStatus::TargetNotFound) => c"target_not_found",
        Some(PhxStatus::AmbiguousTarget) => c"ambiguous_target",
        Some(PhxStatus::InvalidCommand) => c"invalid_command",
        Some(PhxStatus::NotFound) => c"not_found",
        Some(PhxStatus::InvalidDocument) => c"invalid_document",
        Some(PhxStatus::EmptyNode) => c"empty_node",
        Some(PhxStatus::UnsupportedInProfile) => c"unsupported_in_profile",
        Some(PhxStatus::InvalidArgument) => c"invalid_argument",
        Some(PhxStatus::Io) => c"io",
        Some(PhxStatus::Panic) => c"panic",
    };
    name.as_ptr()
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn phx_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `data`/`len` must be a buffer returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn phx_bytes_free(data: *mut u8, len: usize) {
    if !data.is_null() {
        drop(Vec::from_raw_parts(data, len, len));
    }
}

/// The built-in STEM lexicon merged with each file in `paths` (may be null
/// when `count` is 0).
///
/// # Safety
/// `paths` must point to `count` NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn phx_lexicon_load(paths: *const *const c_char, count: usize, out_lexicon: *mut *mut PhxLexicon) -> PhxStatus {
    guard(|| {
        let slot = out(out_lexicon)?;
        let mut files = Vec::with_capacity(count);
        if count > 0 {
            if paths.is_null() {
                return Err(Fail(PhxStatus::NullArgument, "null path array".into()));
            }
            for i in 0..count {
                files.push(PathBuf::from(text(*paths.add(i))?));
            }
        }
        let lex = Lexicon::stem_with_files(&files).map_err(|e| Fail(PhxStatus::Io, e.to_string()))?;
        *slot = Box::into_raw(Box::new(PhxLexicon(lex)));
        Ok(())
    })
}

/// # Safety
/// `lexicon` must come from [`phx_lexicon_load`] or be null.
#[no_mangle]
pub unsafe extern "C" fn phx_lexicon_free(lexicon: *mut PhxLexicon) {
    if !lexicon.is_null() {
        drop(Box::from_raw(lexicon));
    }
}

/// Transcribes one utterance. `out_residual` may be null.
///
/// # Safety
/// Pointers must be valid; `lexicon` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn phx_transcribe(
    lexicon: *const PhxLexicon,
    utterance: *const c_char,
    out_latex: *mut *mut c_char,
    out_residual: *mut *mut c_char,
) -> PhxStatus {
    guard(|| {
        let lex = lexicon.as_ref().ok_or_else(|| Fail(PhxStatus::NullArgument, "null lexicon".into()))?;
        let u = text(utterance)?;
        let slot = out(out_latex)?;
        let t = parse_spoken(u, &lex.0, None).map_err(spoken_fail)?;
        *slot = c_string(render_latex(&t.expr, &RenderOptions::default()));
        if let Some(r) = out_residual.as_mut() {
            *r = c_string(t.residual_text);
        }
        Ok(())
    })
}

/// Applies a spoken edit command to a LaTeX equation.
///
/// # Safety
/// Pointers must be valid; `lexicon` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn phx_apply_edit(
    lexicon: *const PhxLexicon,
    latex: *const c_char,
    command: *const c_char,
    out_latex: *mut *mut c_char,
) -> PhxStatus {
    guard(|| {
        let lex = lexicon.as_ref().ok_or_else(|| Fail(PhxStatus::NullArgument, "null lexicon".into()))?;
        let expr = parse_latex(text(latex)?).map_err(latex_fail)?;
        let cmd = parse_command(text(command)?, &lex.0).map_err(edit_fail)?;
        let slot = out(out_latex)?;
        let result = apply_command(&expr, &cmd).map_err(edit_fail)?;
        *slot = c_string(render_latex(&result, &RenderOptions::default()));
        Ok(())
    })
}

/// Converts LaTeX to MathML; `word_restricted` selects the Word profile.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn phx_latex_to_mathml(latex: *const c_char, word_restricted: bool, out_mathml: *mut *mut c_char) -> PhxStatus {
    guard(|| {
        let expr = parse_latex(text(latex)?).map_err(latex_fail)?;
        expr.validate().map_err(|e| Fail(PhxStatus::InvalidExpression, e.to_string()))?;
        let slot = out(out_mathml)?;
        let profile = if word_restricted { MathmlProfile::WordRestricted } else { MathmlProfile::Full };
        let m = render_mathml(&expr, profile).map_err(|e| Fail(PhxStatus::UnsupportedInProfile, e.to_string()))?;
        *slot = c_string(m);
        Ok(())
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn phx_workspace_new(title: *const c_char, out_workspace: *mut *mut PhxWorkspace) -> PhxStatus {
    guard(|| {
        let t = text(title)?;
        let slot = out(out_workspace)?;
        *slot = Box::into_raw(Box::new(PhxWorkspace(Workspace::new(t))));
        Ok(())
    })
}

/// Parses a schema_version 1 document.
///
/// # Safety
/// `data` must point to `len` readable bytes.
#[no_mangle]
pub unsafe extern "C" fn phx_workspace_load(data: *const u8, len: usize, out_workspace: *mut *mut PhxWorkspace) -> PhxStatus {
    guard(|| {
        if data.is_null() {
            return Err(Fail(PhxStatus::NullArgument, "null document".into()));
        }
        let slot = out(out_workspace)?;
        let ws = workspace::load(std::slice::from_raw_parts(data, len)).map_err(workspace_fail)?;
        *slot = Box::into_raw(Box::new(PhxWorkspace(ws)));
        Ok(())
    })
}

/// Serializes the workspace as a NUL-terminated JSON document.
///
/// # Safety
/// `workspace` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn phx_workspace_save(workspace: *const PhxWorkspace, out_json: *mut *mut c_char) -> PhxStatus {
    guard(|| {
        let ws = workspace.as_ref().ok_or_else(|| Fail(PhxStatus::NullArgument, "null workspace".into()))?;
        let slot = out(out_json)?;
        let bytes = workspace::save(&ws.0);
        *slot = c_string(String::from_utf8(bytes).expect("JSON is UTF-8"));
        Ok(())
    })
}

/// Adds a node at (`x`, `y`). `parent` 0 means no parent.
///
/// # Safety
/// `workspace` must be a live handle; `out_node` must be writable.
#[no_mangle]
pub unsafe extern "C" fn phx_workspace_add_node(
    workspace: *mut PhxWorkspace,
    x: f64,
    y: f64,
    parent: u64,
    out_node: *mut u64,
) -> PhxStatus {
    guard(|| {
        let ws = workspace.as_mut().ok_or_else(|| Fail(PhxStatus::NullArgument, "null workspace".into()))?;
        let slot = out(out_node)?;
        let parent = (parent != 0).then_some(parent);
        *slot = ws.0.add_node(Point::new(x, y), parent).map_err(workspace_fail)?;
        Ok(())
    })
}

/// Appends an equation to `node`. `parent_equation` 0 selects the default parent.
///
/// # Safety
/// Pointers must be valid; `workspace` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn phx_workspace_add_equation(
    workspace: *mut PhxWorkspace,
    node: u64,
    latex: *const c_char,
    parent_equation: u64,
    out_equation: *mut u64,
) -> PhxStatus {
    guard(|| {
        let ws = workspace.as_mut().ok_or_else(|| Fail(PhxStatus::NullArgument, "null workspace".into()))?;
        let expr = parse_latex(text(latex)?).map_err(latex_fail)?;
        let slot = out(out_equation)?;
        let parent = (parent_equation != 0).then_some(parent_equation);
        *slot = ws.0.add_equation(node, expr, parent).map_err(workspace_fail)?;
        Ok(())
    })
}

/// Exports `node`; `format` is a [`PhxExportFormat`] value. The payload is written to `out_data`/`out_len` (free with
/// [`phx_bytes_free`]); `out_media_type` may be null.
///
/// # Safety
/// Pointers must be valid; `workspace` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn phx_export(
    workspace: *const PhxWorkspace,
    node: u64,
    format: u32,
    include_annotations: bool,
    out_data: *mut *mut u8,
    out_len: *mut usize,
    out_media_type: *mut *mut c_char,
) -> PhxStatus {
    guard(|| {
        let ws = workspace.as_ref().ok_or_else(|| Fail(PhxStatus::NullArgument, "null workspace".into()))?;
        let (data_slot, len_slot) = (out(out_data)?, out(out_len)?);
        let n = ws.0.node(node).map_err(workspace_fail)?;
        let format = match format {
            f if f == PhxExportFormat::Latex as u32 => ExportFormat::Latex,
            f if f == PhxExportFormat::WordMathml as u32 => ExportFormat::WordMathml,
            f if f == PhxExportFormat::PrintHtml as u32 => ExportFormat::PrintHtml,
            f => return Err(Fail(PhxStatus::InvalidArgument, format!("unknown export format {f}"))),
        };
        let bundle = export(n, format, include_annotations, &ws.0.preferences.render).map_err(|e| match e {
            ExportError::EmptyNode => Fail(PhxStatus::EmptyNode, e.to_string()),
            ExportError::Mathml(_) => Fail(PhxStatus::UnsupportedInProfile, e.to_string()),
        })?;
        let mut payload = bundle.payload.into_boxed_slice();
        *len_slot = payload.len();
        *data_slot = payload.as_mut_ptr();
        std::mem::forget(payload);
        if let Some(m) = out_media_type.as_mut() {
            *m = c_string(bundle.media_type);
        }
        Ok(())
    })
}

/// # Safety
/// `workspace` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn phx_workspace_free(workspace: *mut PhxWorkspace) {
    if !workspace.is_null() {
        drop(Box::from_raw(workspace));
    }
}
