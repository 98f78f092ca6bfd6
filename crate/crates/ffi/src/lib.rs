//! C interface to the diachron metrics.
//!
//! Every fallible function returns a [`DiachronStatus`]; on failure a message
//! is kept per thread and can be read with [`diachron_last_error`]. Objects
//! are opaque handles released with their matching `_free` function. Strings
//! returned through out-parameters belong to the caller and are released
//! with [`diachron_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fs::File;
use std::io::BufReader;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use diachron::corpus::{read_traces, trace_to_json};
use diachron::metrics::{
    corpus_report, correction_time_exact, edit_overhead_exact, relative_correctness_exact, Fraction, StreamingMetrics,
};
use diachron::{Delay, IncrementalTrace, StepOutput, TaskKind, TokenSequence};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiachronStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidTrace = 4,
    Metric = 5,
    Io = 6,
    OutOfRange = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiachronTask {
    Tagging = 0,
    Classification = 1,
}

impl From<DiachronTask> for TaskKind {
    fn from(task: DiachronTask) -> Self {
        match task {
            DiachronTask::Tagging => TaskKind::Tagging,
            DiachronTask::Classification => TaskKind::Classification,
        }
    }
}

/// One validated incremental trace.
pub struct DiachronTrace(IncrementalTrace);

/// An ordered collection of traces, as read from a trace file.
pub struct DiachronTraceSet(Vec<IncrementalTrace>);

/// Incremental metric accumulator fed one step at a time.
pub struct DiachronStream(StreamingMetrics);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(DiachronStatus, String);

impl Failure {
    fn new(status: DiachronStatus, message: impl ToString) -> Self {
        Failure(status, message.to_string())
    }
}

fn set_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(message));
}

/// Runs `body`, records any failure and converts panics to `Panic`.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> DiachronStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => DiachronStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            DiachronStatus::Panic
        }
    }
}

unsafe fn non_null<'a, T>(ptr: *const T, name: &str) -> Result<&'a T, Failure> {
    ptr.as_ref().ok_or_else(|| Failure::new(DiachronStatus::NullPointer, format!("`{name}` is NULL")))
}

unsafe fn non_null_mut<'a, T>(ptr: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    ptr.as_mut().ok_or_else(|| Failure::new(DiachronStatus::NullPointer, format!("`{name}` is NULL")))
}

unsafe fn string(ptr: *const c_char, name: &str) -> Result<String, Failure> {
    if ptr.is_null() {
        return Err(Failure::new(DiachronStatus::NullPointer, format!("`{name}` is NULL")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map(String::from)
        .map_err(|e| Failure::new(DiachronStatus::InvalidUtf8, format!("`{name}`: {e}")))
}

unsafe fn strings(ptr: *const *const c_char, len: usize, name: &str) -> Result<Vec<String>, Failure> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if ptr.is_null() {
        return Err(Failure::new(DiachronStatus::NullPointer, format!("`{name}` is NULL")));
    }
    std::slice::from_raw_parts(ptr, len).iter().enumerate().map(|(i, &s)| string(s, &format!("{name}[{i}]"))).collect()
}

unsafe fn delay_list(ptr: *const usize, len: usize) -> Result<Vec<Delay>, Failure> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if ptr.is_null() {
        return Err(Failure::new(DiachronStatus::NullPointer, "`delays` is NULL"));
    }
    Ok(std::slice::from_raw_parts(ptr, len).iter().copied().map(Delay).collect())
}

fn c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s).map(CString::into_raw).map_err(|e| Failure::new(DiachronStatus::InvalidUtf8, e))
}

fn metric<E: std::fmt::Display>(e: E) -> Failure {
    Failure::new(DiachronStatus::Metric, e)
}

unsafe fn write_fraction(value: Fraction, out: *mut f64, num: *mut u64, den: *mut u64) -> Result<(), Failure> {
    *non_null_mut(out, "out")? = *value.numer() as f64 / *value.denom() as f64;
    if let Some(num) = num.as_mut() {
        *num = *value.numer();
    }
    if let Some(den) = den.as_mut() {
        *den = *value.denom();
    }
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn diachron_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn diachron_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn diachron_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a trace from `n` tokens and the concatenated labels of all steps:
/// `n * (n + 1) / 2` labels for tagging (1, then 2, ...), `n` for
/// classification.
///
/// # Safety
/// `tokens` and `labels` must point to arrays of that many valid C strings;
/// `id` must be a valid C string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn diachron_trace_new(
    id: *const c_char,
    task: DiachronTask,
    tokens: *const *const c_char,
    n: usize,
    labels: *const *const c_char,
    out: *mut *mut DiachronTrace,
) -> DiachronStatus {
    guard(|| {
        let out = non_null_mut(out, "out")?;
        let task = TaskKind::from(task);
        let tokens = TokenSequence::new(string(id, "id")?, strings(tokens, n, "tokens")?)
            .map_err(|e| Failure::new(DiachronStatus::InvalidTrace, e))?;
        let widths: Vec<usize> = (1..=n).map(|t| task.labels_at_step(t)).collect();
        let mut flat = strings(labels, widths.iter().sum(), "labels")?.into_iter();
        let steps = widths.iter().map(|&w| StepOutput(flat.by_ref().take(w).collect())).collect();
        let trace = IncrementalTrace::new(task, tokens, steps, None)
            .map_err(|e| Failure::new(DiachronStatus::InvalidTrace, e))?;
        *out = Box::into_raw(Box::new(DiachronTrace(trace)));
        Ok(())
    })
}

/// Parses one trace JSONL record.
///
/// # Safety
/// `json` must be a valid C string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn diachron_trace_from_json(json: *const c_char, out: *mut *mut DiachronTrace) -> DiachronStatus {
    guard(|| {
        let out = non_null_mut(out, "out")?;
        let text = string(json, "json")?;
        let mut traces = read_traces(text.as_bytes()).map_err(|e| {
            let status = match e {
                diachron::CorpusError::Trace { .. } => DiachronStatus::InvalidTrace,
                _ => DiachronStatus::Parse,
            };
            Failure::new(status, e)
        })?;
        if traces.len() != 1 {
            return Err(Failure::new(DiachronStatus::Parse, format!("expected one trace, found {}", traces.len())));
        }
        *out = Box::into_raw(Box::new(DiachronTrace(traces.remove(0))));
        Ok(())
    })
}

/// # Safety
/// `trace` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn diachron_trace_free(trace: *mut DiachronTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Number of tokens, or 0 for NULL.
///
/// # Safety
/// `trace` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn diachron_trace_len(trace: *const DiachronTrace) -> usize {
    trace.as_ref().map_or(0, |t| t.0.n())
}

/// Serializes the trace as one JSONL record (without newline).
///
/// # Safety
/// `trace` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn diachron_trace_to_json(trace: *const DiachronTrace, out: *mut *mut c_char) -> DiachronStatus {
    guard(|| {
        let trace = non_null(trace, "trace")?;
        *non_null_mut(out, "out")? = c_string(trace_to_json(&trace.0))?;
        Ok(())
    })
}

/// Edit overhead at `delay`. `num` and `den` may be NULL; when given they
/// receive the exact reduced fraction.
///
/// # Safety
/// `trace` must be a live handle; `out` writable; `num`/`den` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn diachron_edit_overhead(
    trace: *const DiachronTrace,
    delay: usize,
    out: *mut f64,
    num: *mut u64,
    den: *mut u64,
) -> DiachronStatus {
    guard(|| {
        let value = edit_overhead_exact(&non_null(trace, "trace")?.0, Delay(delay)).map_err(metric)?;
        write_fraction(value, out, num, den)
    })
}

/// Correction time score; see [`diachron_edit_overhead`] for the outputs.
///
/// # Safety
/// As for [`diachron_edit_overhead`].
#[no_mangle]
pub unsafe extern "C" fn diachron_correction_time(
    trace: *const DiachronTrace,
    out: *mut f64,
    num: *mut u64,
    den: *mut u64,
) -> DiachronStatus {
    guard(|| {
        let value = correction_time_exact(&non_null(trace, "trace")?.0).map_err(metric)?;
        write_fraction(value, out, num, den)
    })
}

/// Relative correctness at `delay`; see [`diachron_edit_overhead`].
///
/// # Safety
/// As for [`diachron_edit_overhead`].
#[no_mangle]
pub unsafe extern "C" fn diachron_relative_correctness(
    trace: *const DiachronTrace,
    delay: usize,
    out: *mut f64,
    num: *mut u64,
    den: *mut u64,
) -> DiachronStatus {
    guard(|| {
        let value = relative_correctness_exact(&non_null(trace, "trace")?.0, Delay(delay)).map_err(metric)?;
        write_fraction(value, out, num, den)
    })
}

/// Reads and validates a trace JSONL file.
///
/// # Safety
/// `path` must be a valid C string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn diachron_traces_read(path: *const c_char, out: *mut *mut DiachronTraceSet) -> DiachronStatus {
    guard(|| {
        let out = non_null_mut(out, "out")?;
        let path = string(path, "path")?;
        let file = File::open(&path).map_err(|e| Failure::new(DiachronStatus::Io, format!("{path}: {e}")))?;
        let traces = read_traces(BufReader::new(file)).map_err(|e| {
            let status = match e {
                diachron::CorpusError::Io(_) => DiachronStatus::Io,
                diachron::CorpusError::Trace { .. } => DiachronStatus::InvalidTrace,
                _ => DiachronStatus::Parse,
            };
            Failure::new(status, format!("{path}: {e}"))
        })?;
        *out = Box::into_raw(Box::new(DiachronTraceSet(traces)));
        Ok(())
    })
}

/// # Safety
/// `set` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn diachron_traces_free(set: *mut DiachronTraceSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// # Safety
/// `set` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn diachron_traces_len(set: *const DiachronTraceSet) -> usize {
    set.as_ref().map_or(0, |s| s.0.len())
}

/// Copies trace `index` into a new handle owned by the caller.
///
/// # Safety
/// `set` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn diachron_traces_get(
    set: *const DiachronTraceSet,
    index: usize,
    out: *mut *mut DiachronTrace,
) -> DiachronStatus {
    guard(|| {
        let set = non_null(set, "set")?;
        let out = non_null_mut(out, "out")?;
        let trace = set.0.get(index).ok_or_else(|| {
            Failure::new(DiachronStatus::OutOfRange, format!("index {index} out of range for {} traces", set.0.len()))
        })?;
        *out = Box::into_raw(Box::new(DiachronTrace(trace.clone())));
        Ok(())
    })
}

/// Corpus report as pretty JSON: per-delay means, mean CT, gold scores when
/// the traces carry gold labels, and per-sequence values.
///
/// # Safety
/// `set` must be a live handle, `delays` an array of `n_delays` values and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn diachron_traces_report(
    set: *const DiachronTraceSet,
    delays: *const usize,
    n_delays: usize,
    out: *mut *mut c_char,
) -> DiachronStatus {
    guard(|| {
        let set = non_null(set, "set")?;
        let out = non_null_mut(out, "out")?;
        let report = corpus_report(&set.0, &delay_list(delays, n_delays)?, None).map_err(metric)?;
        *out = c_string(serde_json::to_string_pretty(&report).expect("reports serialize"))?;
        Ok(())
    })
}

/// Starts a streaming computation of EO and RC at each delay, plus CT.
///
/// # Safety
/// `delays` must point to `n_delays` values and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn diachron_stream_new(
    task: DiachronTask,
    delays: *const usize,
    n_delays: usize,
    out: *mut *mut DiachronStream,
) -> DiachronStatus {
    guard(|| {
        let out = non_null_mut(out, "out")?;
        let delays = delay_list(delays, n_delays)?;
        if delays.is_empty() {
            return Err(Failure::new(DiachronStatus::Metric, "no delays given"));
        }
        *out = Box::into_raw(Box::new(DiachronStream(StreamingMetrics::new(task.into(), &delays))));
        Ok(())
    })
}

/// Feeds the full output of the next step.
///
/// # Safety
/// `stream` must be a live handle and `labels` an array of `len` C strings.
#[no_mangle]
pub unsafe extern "C" fn diachron_stream_push(
    stream: *mut DiachronStream,
    labels: *const *const c_char,
    len: usize,
) -> DiachronStatus {
    guard(|| {
        let stream = non_null_mut(stream, "stream")?;
        stream.0.push(&strings(labels, len, "labels")?).map_err(metric)
    })
}

/// Consumes the stream and writes the result as JSON:
/// `{"n": .., "ct": .., "delays": [{"delay": .., "eo": .., "rc": ..}]}`.
/// The handle is freed even when this fails.
///
/// # Safety
/// `stream` must be a live handle (it is invalid afterwards) and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn diachron_stream_finish(stream: *mut DiachronStream, out: *mut *mut c_char) -> DiachronStatus {
    guard(|| {
        if stream.is_null() {
            return Err(Failure::new(DiachronStatus::NullPointer, "`stream` is NULL"));
        }
        let stream = Box::from_raw(stream);
        let out = non_null_mut(out, "out")?;
        let result = stream.0.finish().map_err(metric)?;
        let f = |x: Fraction| *x.numer() as f64 / *x.denom() as f64;
        let json = serde_json::json!({
            "n": result.n,
            "ct": f(result.ct),
            "delays": result
                .by_delay
                .iter()
                .map(|&(d, eo, rc)| serde_json::json!({ "delay": d, "eo": f(eo), "rc": f(rc) }))
                .collect::<Vec<_>>(),
        });
        *out = c_string(json.to_string())?;
        Ok(())
    })
}

/// Releases a stream without finishing it.
///
/// # Safety
/// `stream` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn diachron_stream_free(stream: *mut DiachronStream) {
    if !stream.is_null() {
        drop(Box::from_raw(stream));
    }
}
