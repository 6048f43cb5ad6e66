//! C ABI over `rbl-core`.
//!
//! Every function returns an [`RblStatus`]. On failure, a message is kept per
//! thread and can be read with [`rbl_last_error_message`]. Trees are opaque
//! handles released with [`rbl_tree_free`]; strings returned by the library
//! are released with [`rbl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rbl_core::broadcast::{assign_bits, Bit, ObservedBits, Visibility};
use rbl_core::estimators::{Estimator, StructParams};
use rbl_core::harness::{exhaustive_risk, run_experiment, ExperimentConfig};
use rbl_core::iso::root_likelihoods;
use rbl_core::rng::RngStream;
use rbl_core::structure::centroids;
use rbl_core::tree::{Model, Tree};
use rbl_core::unrooted::{ShuffledView, UnrootedTree};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RblStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BufferTooSmall = 3,
    Internal = 4,
}

/// A recursive tree on `n + 1` vertices labeled in insertion order.
pub struct RblTree {
    tree: Tree,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Fail(RblStatus, String);

impl From<rbl_core::Error> for Fail {
    fn from(e: rbl_core::Error) -> Self {
        Fail(RblStatus::InvalidArgument, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(RblStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(RblStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> RblStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RblStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            RblStatus::Internal
        }
    }
}

unsafe fn tree_ref<'a>(tree: *const RblTree) -> Result<&'a Tree, Fail> {
    tree.as_ref().map(|t| &t.tree).ok_or_else(|| null("tree"))
}

unsafe fn out_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn c_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| invalid(format!("{what} is not UTF-8")))
}

/// Writes `src` into `buf` of capacity `len`, or reports the needed length.
unsafe fn fill<T: Copy>(src: &[T], buf: *mut T, len: usize) -> Result<(), Fail> {
    if buf.is_null() {
        return Err(null("buffer"));
    }
    if len < src.len() {
        return Err(Fail(
            RblStatus::BufferTooSmall,
            format!("buffer holds {len}, need {}", src.len()),
        ));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

fn estimator(name: &str) -> Result<Estimator, Fail> {
    Ok(Estimator::from_name(name, Some(StructParams::default()))?)
}

fn emit_tree(tree: Tree, out: *mut *mut RblTree) -> Result<(), Fail> {
    let out = unsafe { out_mut(out, "out")? };
    *out = Box::into_raw(Box::new(RblTree { tree }));
    Ok(())
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rbl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Uniform random recursive tree with `n` edges, drawn from `seed`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rbl_tree_generate_urrt(n: usize, seed: u64, out: *mut *mut RblTree) -> RblStatus {
    guard(|| emit_tree(Model::Urrt.generate(n, &mut RngStream::new(seed, 0).rng())?, out))
}

/// Preferential attachment tree with `n` edges and parameter `beta > 0`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rbl_tree_generate_pa(n: usize, beta: f64, seed: u64, out: *mut *mut RblTree) -> RblStatus {
    guard(|| emit_tree(Model::Pa { beta }.generate(n, &mut RngStream::new(seed, 0).rng())?, out))
}

/// Tree from the parents of vertices `1..=n`; each parent must precede its child.
///
/// # Safety
/// `parents` must point to `n` readable values (it may be null when `n == 0`);
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rbl_tree_from_parents(parents: *const u32, n: usize, out: *mut *mut RblTree) -> RblStatus {
    guard(|| {
        let seq = if n == 0 {
            &[][..]
        } else if parents.is_null() {
            return Err(null("parents"));
        } else {
            std::slice::from_raw_parts(parents, n)
        };
        emit_tree(Tree::from_parents(seq)?, out)
    })
}

/// # Safety
/// `tree` must come from this library and not be freed twice. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn rbl_tree_free(tree: *mut RblTree) {
    if !tree.is_null() {
        drop(Box::from_raw(tree));
    }
}

/// # Safety
/// `tree` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rbl_tree_num_vertices(tree: *const RblTree, out: *mut usize) -> RblStatus {
    guard(|| {
        *out_mut(out, "out")? = tree_ref(tree)?.len();
        Ok(())
    })
}

/// Copies the parents of vertices `1..=n` into `buf` (capacity `len`).
///
/// # Safety
/// `tree` must be valid; `buf` must hold `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn rbl_tree_parents(tree: *const RblTree, buf: *mut u32, len: usize) -> RblStatus {
    guard(|| fill(tree_ref(tree)?.parents(), buf, len))
}

/// Broadcasts a uniform root bit with flip probability `q`, writing one value
/// per vertex: `1`, `-1`, or `0` for a bit hidden by `leaves_only`.
///
/// # Safety
/// `tree` must be valid; `buf` must hold `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn rbl_assign_bits(
    tree: *const RblTree,
    q: f64,
    seed: u64,
    leaves_only: bool,
    buf: *mut i8,
    len: usize,
) -> RblStatus {
    guard(|| {
        let t = tree_ref(tree)?;
        let vis = if leaves_only { Visibility::LeavesOnly } else { Visibility::AllVertices };
        let a = assign_bits(t, q, &mut RngStream::new(seed, 0).rng())?.with_visibility(t, vis);
        let vals: Vec<i8> = (0..t.len()).map(|v| a.get(v).map_or(0, |b| b.value() as i8)).collect();
        fill(&vals, buf, len)
    })
}

/// Estimates the root bit from the tree shape and the bits in `bits`
/// (`1`, `-1`, or `0` for hidden; any hidden bit selects the leaves-only
/// variant). Labels are shuffled with `seed` before the estimator sees them.
/// `estimator` is one of `majority`, `centroid`, `bayes`, `structured`.
///
/// # Safety
/// `tree` must be valid; `bits` must hold one value per vertex; `estimator`
/// must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rbl_estimate(
    tree: *const RblTree,
    bits: *const i8,
    len: usize,
    estimator_name: *const c_char,
    seed: u64,
    out: *mut i8,
) -> RblStatus {
    guard(|| {
        let t = tree_ref(tree)?;
        let est = estimator(c_str(estimator_name, "estimator")?)?;
        let out = out_mut(out, "out")?;
        if bits.is_null() {
            return Err(null("bits"));
        }
        if len != t.len() {
            return Err(invalid(format!("expected {} bits, got {len}", t.len())));
        }
        let raw = std::slice::from_raw_parts(bits, len);
        let labeled = raw
            .iter()
            .map(|&b| match b {
                0 => Ok(None),
                x => Bit::from_sign(x as i64).map(Some).ok_or_else(|| invalid(format!("bad bit {x}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let vis = if labeled.iter().any(Option::is_none) { Visibility::LeavesOnly } else { Visibility::AllVertices };
        est.check_visibility(vis)?;

        let view = ShuffledView::new(t, &mut RngStream::new(seed, 1).rng());
        let mut relabeled = vec![None; t.len()];
        for (v, b) in labeled.into_iter().enumerate() {
            relabeled[view.perm[v] as usize] = b;
        }
        let mut observed = ObservedBits::new(&relabeled, Visibility::AllVertices);
        if vis == Visibility::LeavesOnly {
            observed = observed.mask_to_leaves(&view.tree);
        }
        let decided = est.prepare(&view.tree)?.decide(&observed, &mut RngStream::new(seed, 2).rng())?;
        *out = decided.value.value() as i8;
        Ok(())
    })
}

/// Posterior probability that each vertex is the root, given only the shape.
///
/// # Safety
/// `tree` must be valid; `buf` must hold `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn rbl_root_posterior(tree: *const RblTree, buf: *mut f64, len: usize) -> RblStatus {
    guard(|| {
        let post = root_likelihoods(&UnrootedTree::from_tree(tree_ref(tree)?)).posterior;
        fill(&post, buf, len)
    })
}

/// Writes the one or two centroids into `buf[0..2]` and their number to `count`.
///
/// # Safety
/// `tree` and `count` must be valid; `buf` must hold two writable values.
#[no_mangle]
pub unsafe extern "C" fn rbl_centroids(tree: *const RblTree, buf: *mut usize, count: *mut usize) -> RblStatus {
    guard(|| {
        let cs = centroids(tree_ref(tree)?);
        let count = out_mut(count, "count")?;
        fill(&cs, buf, 2)?;
        *count = cs.len();
        Ok(())
    })
}

/// Exact error probability of an estimator on URRTs with `n <= 7` edges.
///
/// # Safety
/// `estimator` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rbl_exhaustive_risk(
    n: usize,
    q: f64,
    estimator_name: *const c_char,
    leaves_only: bool,
    out: *mut f64,
) -> RblStatus {
    guard(|| {
        let est = estimator(c_str(estimator_name, "estimator")?)?;
        let out = out_mut(out, "out")?;
        let vis = if leaves_only { Visibility::LeavesOnly } else { Visibility::AllVertices };
        *out = exhaustive_risk(n, q, &est, vis)?;
        Ok(())
    })
}

/// Runs an experiment described by a JSON configuration and returns the
/// results as a JSON array in `*out`, to be released with [`rbl_string_free`].
/// `threads == 0` uses the default thread pool.
///
/// # Safety
/// `config_json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rbl_run_experiment_json(
    config_json: *const c_char,
    threads: usize,
    out: *mut *mut c_char,
) -> RblStatus {
    guard(|| {
        let cfg = ExperimentConfig::from_json_str(c_str(config_json, "config")?)?;
        let out = out_mut(out, "out")?;
        let results = run_experiment(&cfg, (threads > 0).then_some(threads))?;
        let text = serde_json::to_string(&results).map_err(|e| Fail(RblStatus::Internal, e.to_string()))?;
        *out = CString::new(text).map_err(|e| Fail(RblStatus::Internal, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn rbl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
