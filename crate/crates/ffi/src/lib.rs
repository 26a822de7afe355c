//! C ABI over `botdyn`.
//!
//! Every fallible function returns a [`BotdynStatus`]; on failure the
//! message is available from [`botdyn_last_error_message`] on the same
//! thread. Handles are opaque and must be released with their `_free`
//! function. Strings returned by the library are released with
//! [`botdyn_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use botdyn::cssr::{count_histories, reconstruct, EpsilonMachine, ReconstructOptions};
use botdyn::ingest::{read_records, Corpus, Format};
use botdyn::measures::{entropy_rate, measure_symbols, shannon_entropy, statistical_complexity, MeasureParams};
use botdyn::pipeline::{run_pipeline, PipelineConfig};
use botdyn::sequencing::{bin, BinningKind, BinningStrategy};
use botdyn::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BotdynStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Malformed or out-of-range input data.
    InputError = 3,
    /// Numerical failure such as a non-converging stationary distribution.
    InternalError = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BotdynBinning {
    Quartile = 0,
    RankUniform = 1,
    Exponential = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BotdynMeasures {
    pub complexity: f64,
    pub entropy_rate: f64,
    pub predictable_information: f64,
    pub n_states: usize,
}

/// Reconstruction parameters. `max_len` is the history window length `L`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BotdynParams {
    pub max_len: usize,
    pub alpha: f64,
    pub min_count: u64,
}

/// Opaque reconstructed machine.
pub struct BotdynMachine {
    inner: EpsilonMachine,
}

/// Opaque validated corpus.
pub struct BotdynCorpus {
    inner: Corpus,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = CString::new(text).ok());
}

fn status_of(error: &Error) -> BotdynStatus {
    if error.is_input_error() {
        BotdynStatus::InputError
    } else {
        BotdynStatus::InternalError
    }
}

struct Failure(BotdynStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(BotdynStatus::NullPointer, format!("`{what}` is null"))
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure(BotdynStatus::InvalidArgument, message.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> BotdynStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            BotdynStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("panic inside botdyn");
            BotdynStatus::Panic
        }
    }
}

/// # Safety
/// `data` must point to `len` readable elements unless `len` is 0.
unsafe fn slice_arg<'a, T>(data: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null(name));
    }
    Ok(slice::from_raw_parts(data, len))
}

unsafe fn str_arg<'a>(s: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| invalid(format!("`{name}` is not valid UTF-8")))
}

fn options(params: &BotdynParams) -> MeasureParams {
    MeasureParams {
        max_len: params.max_len,
        alpha: params.alpha,
        min_count: params.min_count,
    }
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next call into the library from this thread.
#[no_mangle]
pub extern "C" fn botdyn_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn botdyn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Defaults: `L = 3`, `alpha = 0.001`, `min_count = 5`.
#[no_mangle]
pub extern "C" fn botdyn_params_default() -> BotdynParams {
    let p = MeasureParams::default();
    BotdynParams {
        max_len: p.max_len,
        alpha: p.alpha,
        min_count: p.min_count,
    }
}

/// Reconstructs a machine from `len` symbols in `0..alphabet_size`.
///
/// # Safety
/// `symbols` must point to `len` bytes and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn botdyn_machine_reconstruct(
    symbols: *const u8,
    len: usize,
    alphabet_size: usize,
    params: BotdynParams,
    out: *mut *mut BotdynMachine,
) -> BotdynStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let symbols = slice_arg(symbols, len, "symbols")?;
        let counts = count_histories(symbols, alphabet_size, params.max_len)?;
        let machine = reconstruct(
            &counts,
            &ReconstructOptions {
                alpha: params.alpha,
                min_count: params.min_count,
            },
        )?;
        *out = Box::into_raw(Box::new(BotdynMachine { inner: machine }));
        Ok(())
    })
}

/// # Safety
/// `machine` must come from [`botdyn_machine_reconstruct`] and not be used
/// afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn botdyn_machine_free(machine: *mut BotdynMachine) {
    if !machine.is_null() {
        drop(Box::from_raw(machine));
    }
}

unsafe fn machine_ref<'a>(machine: *const BotdynMachine) -> Result<&'a EpsilonMachine, Failure> {
    machine.as_ref().map(|m| &m.inner).ok_or_else(|| null("machine"))
}

/// # Safety
/// `machine` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn botdyn_machine_num_states(machine: *const BotdynMachine, out: *mut usize) -> BotdynStatus {
    guard(|| {
        let m = machine_ref(machine)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = m.num_states();
        Ok(())
    })
}

/// Statistical complexity in bits.
///
/// # Safety
/// `machine` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn botdyn_machine_complexity(machine: *const BotdynMachine, out: *mut f64) -> BotdynStatus {
    guard(|| {
        let m = machine_ref(machine)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = statistical_complexity(m)?;
        Ok(())
    })
}

/// Entropy rate in bits per symbol.
///
/// # Safety
/// `machine` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn botdyn_machine_entropy_rate(machine: *const BotdynMachine, out: *mut f64) -> BotdynStatus {
    guard(|| {
        let m = machine_ref(machine)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = entropy_rate(m)?;
        Ok(())
    })
}

/// Copies the stationary distribution into `out` (capacity `cap`) and
/// stores the number of states in `written`. Returns `BufferTooSmall`
/// without copying when `cap` is insufficient; `written` is still set.
///
/// # Safety
/// `out` must have room for `cap` doubles; `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn botdyn_machine_stationary(
    machine: *const BotdynMachine,
    out: *mut f64,
    cap: usize,
    written: *mut usize,
) -> BotdynStatus {
    guard(|| {
        let m = machine_ref(machine)?;
        let written = written.as_mut().ok_or_else(|| null("written"))?;
        *written = m.stationary.len();
        if cap < m.stationary.len() {
            return Err(Failure(
                BotdynStatus::BufferTooSmall,
                format!("need {} slots, got {cap}", m.stationary.len()),
            ));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        ptr::copy_nonoverlapping(m.stationary.as_ptr(), out, m.stationary.len());
        Ok(())
    })
}

/// Serializes the machine to JSON. Release the string with
/// [`botdyn_string_free`].
///
/// # Safety
/// `machine` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn botdyn_machine_to_json(machine: *const BotdynMachine, out: *mut *mut c_char) -> BotdynStatus {
    guard(|| {
        let m = machine_ref(machine)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let json = m.to_json()?;
        *out = CString::new(json)
            .map_err(|e| Failure(BotdynStatus::InternalError, e.to_string()))?
            .into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be used afterwards. NULL is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn botdyn_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Reconstructs and measures a symbol string in one call.
///
/// # Safety
/// `symbols` must point to `len` bytes and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn botdyn_measure_symbols(
    symbols: *const u8,
    len: usize,
    alphabet_size: usize,
    params: BotdynParams,
    out: *mut BotdynMeasures,
) -> BotdynStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let symbols = slice_arg(symbols, len, "symbols")?;
        let m = measure_symbols(symbols, alphabet_size, &options(&params))?;
        *out = BotdynMeasures {
            complexity: m.complexity,
            entropy_rate: m.entropy_rate,
            predictable_information: m.predictable_information,
            n_states: m.machine.num_states(),
        };
        Ok(())
    })
}

/// Discretizes `len` scores into symbols `0..4` written to `out`.
/// `exp_base` is only read for `Exponential`.
///
/// # Safety
/// `raw` must point to `len` doubles and `out` to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn botdyn_bin(
    raw: *const f64,
    len: usize,
    kind: BotdynBinning,
    exp_base: f64,
    out: *mut u8,
) -> BotdynStatus {
    guard(|| {
        let raw = slice_arg(raw, len, "raw")?;
        let strategy = match kind {
            BotdynBinning::Quartile => BinningStrategy::new(BinningKind::Quartile),
            BotdynBinning::RankUniform => BinningStrategy::new(BinningKind::RankUniform),
            BotdynBinning::Exponential => BinningStrategy::exponential(exp_base)?,
        };
        let symbols = bin(raw, &strategy)?;
        if !symbols.is_empty() {
            if out.is_null() {
                return Err(null("out"));
            }
            ptr::copy_nonoverlapping(symbols.as_ptr(), out, symbols.len());
        }
        Ok(())
    })
}

/// Shannon entropy in bits of a probability vector.
///
/// # Safety
/// `dist` must point to `len` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn botdyn_shannon_entropy(dist: *const f64, len: usize, out: *mut f64) -> BotdynStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = shannon_entropy(slice_arg(dist, len, "dist")?)?;
        Ok(())
    })
}

/// Reads and validates a corpus file (`.csv` or `.jsonl`).
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn botdyn_corpus_read(path: *const c_char, out: *mut *mut BotdynCorpus) -> BotdynStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let path = str_arg(path, "path")?;
        let format = Format::from_path(path.as_ref())
            .ok_or_else(|| Failure(BotdynStatus::InputError, format!("unknown corpus extension: {path}")))?;
        let corpus = read_records(path, format)?;
        *out = Box::into_raw(Box::new(BotdynCorpus { inner: corpus }));
        Ok(())
    })
}

/// Number of records, or 0 for NULL.
///
/// # Safety
/// `corpus` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn botdyn_corpus_len(corpus: *const BotdynCorpus) -> usize {
    corpus.as_ref().map_or(0, |c| c.inner.len())
}

/// # Safety
/// `corpus` must come from [`botdyn_corpus_read`] and not be used
/// afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn botdyn_corpus_free(corpus: *mut BotdynCorpus) {
    if !corpus.is_null() {
        drop(Box::from_raw(corpus));
    }
}

/// Runs the whole pipeline from a JSON configuration (same schema as the
/// CLI's `--config`).
///
/// # Safety
/// `config_json` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn botdyn_pipeline_run(config_json: *const c_char) -> BotdynStatus {
    guard(|| {
        let text = str_arg(config_json, "config_json")?;
        let config: PipelineConfig =
            serde_json::from_str(text).map_err(|e| Failure(BotdynStatus::InvalidArgument, e.to_string()))?;
        run_pipeline(&config)?;
        Ok(())
    })
}
