//! Compiler for annotated documentary scripts.
//!
//! The crate turns a bracket-tagged narration script plus caption timing into
//! an edit decision list, asset download manifests, polished caption files and
//! a workload estimate for the production pipeline.
//!
//! Modules map onto the pipeline stages:
//!
//! - [`script`]: the tag DSL (parse, validate, serialize)
//! - [`captions`]: SRT/VTT I/O, caption polishing and script alignment
//! - [`timeline`]: clip fitting, overlay planning, split compilation and EDL export
//! - [`manifest`]: download-task manifests, integrity checks, graphic/thumbnail specs
//! - [`workload`]: workload arithmetic and recording split planning

pub mod captions;
pub mod diag;
pub mod interval;
pub mod manifest;
pub mod script;
pub mod timeline;
pub mod workload;

pub use captions::{
    align_parts, align_script_to_captions, export_captions, parse_captions, polish_captions, AlignedScript, CaptionCue,
    CaptionFormat, Cut, CutList, CutReason, PolishConfig, Polished,
};
pub use diag::{Diagnostic, Severity};
pub use interval::Interval;
pub use manifest::{
    generate_manifest, parse_manifest, transition_graphic_name, validate_thumbnails, validate_transition_graphic,
    verify_assets, AssetMetadata, ManifestEntry,
};
pub use script::{
    parse_script, serialize_script, validate_script, AnnotatedScript, AssetId, AssetKind, ParseError, Speed, Tag,
};
pub use timeline::{
    compile_split, export_edl, fit_clip, import_edl, place_stylized_overlays, resolve_transition_display,
    CompileConfig, CompiledSplit, CoverageReport, FitResult, Timeline, TimelineEvent,
};
pub use workload::{plan_splits, SplitId, SplitPlan};
