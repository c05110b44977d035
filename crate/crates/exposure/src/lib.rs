//! Text and CSV formats, the scripted scenario renderer and the command
//! implementations behind the `exposure` binary.

pub mod commands;
pub mod frames;
pub mod layout_doc;
pub mod records;
pub mod scenario;

pub use frames::{read_frames, write_frame, write_frames, FrameParseError, FrameReader};
pub use layout_doc::{parse_layout, LayoutDocError};
