//! Time-tagged detection streams, their file formats, and coincidence
//! histograms.

mod correlate;
mod format;
mod stream;

pub use correlate::{correlate, Acquisition, Histogram, PLATEAU_RANGE_PS};
pub use format::{
    decode_binary, decode_csv, encode_binary, encode_csv, parse_timetags, write_timetags,
    TimeTagFormat, HEADER_LEN, MAGIC, RECORD_LEN,
};
pub use stream::{is_valid_channel, TimeTag, TimeTagStream, CHANNEL_BIEXCITON, CHANNEL_EXCITON};
