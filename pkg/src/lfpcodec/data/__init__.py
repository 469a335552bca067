from .frames import (
    Frame,
    load_frames,
    load_raw_y,
    normalize,
    parse_pgm,
    pgm_bytes,
    read_pgm,
    write_frames,
    write_pgm,
    write_raw_y,
)
from .patches import (
    ExtractionResult,
    PatchDataset,
    extract_patch_samples,
    load_dataset,
    store_dataset,
)

__all__ = [
    "ExtractionResult",
    "Frame",
    "PatchDataset",
    "extract_patch_samples",
    "load_dataset",
    "load_frames",
    "load_raw_y",
    "normalize",
    "parse_pgm",
    "pgm_bytes",
    "read_pgm",
    "store_dataset",
    "write_frames",
    "write_pgm",
    "write_raw_y",
]
