use crate::error::{Error, Result};

/// Detector channel for biexciton photons.
pub const CHANNEL_BIEXCITON: u8 = 1;
/// Detector channel for exciton photons.
pub const CHANNEL_EXCITON: u8 = 2;

/// One detection event.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeTag {
    pub t_ps: u64,
    pub channel: u8,
}

impl TimeTag {
    pub fn new(channel: u8, t_ps: u64) -> Self {
        Self { t_ps, channel }
    }
}

pub fn is_valid_channel(c: u8) -> bool {
    c == CHANNEL_BIEXCITON || c == CHANNEL_EXCITON
}

/// Time-ordered detections on channels 1 and 2.
///
/// Events with equal timestamps are kept in channel order so that every
/// stream has a single canonical ordering.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TimeTagStream {
    events: Vec<TimeTag>,
    duration_ps: u64,
}

impl TimeTagStream {
    /// Validate an already-ordered event list.
    ///
    /// A `duration_ps` of zero means "unknown"; the span of the events is
    /// used instead.
    pub fn new(events: Vec<TimeTag>, duration_ps: u64) -> Result<Self> {
        for (i, e) in events.iter().enumerate() {
            if !is_valid_channel(e.channel) {
                return Err(Error::Data(format!(
                    "event {i} has invalid channel {}",
                    e.channel
                )));
            }
        }
        if let Some(i) = events.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::Data(format!(
                "timestamps not ordered at event {}: {} after {}",
                i + 1,
                events[i + 1].t_ps,
                events[i].t_ps
            )));
        }
        let duration_ps = if duration_ps == 0 {
            events.last().map_or(0, |e| e.t_ps + 1)
        } else {
            duration_ps
        };
        if let Some(last) = events.last() {
            if last.t_ps >= duration_ps {
                return Err(Error::Data(format!(
                    "event at {} ps lies outside the {duration_ps} ps acquisition",
                    last.t_ps
                )));
            }
        }
        Ok(Self {
            events,
            duration_ps,
        })
    }

    /// Sort and validate.
    pub fn from_unsorted(mut events: Vec<TimeTag>, duration_ps: u64) -> Result<Self> {
        events.sort_unstable();
        Self::new(events, duration_ps)
    }

    pub fn events(&self) -> &[TimeTag] {
        &self.events
    }

    pub fn into_events(self) -> Vec<TimeTag> {
        self.events
    }

    pub fn duration_ps(&self) -> u64 {
        self.duration_ps
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn count(&self, channel: u8) -> usize {
        self.events.iter().filter(|e| e.channel == channel).count()
    }

    /// All timestamps shifted by `offset_ps`; the acquisition grows by the
    /// same amount.
    pub fn shifted(&self, offset_ps: u64) -> Result<Self> {
        let events = self
            .events
            .iter()
            .map(|e| {
                e.t_ps
                    .checked_add(offset_ps)
                    .map(|t| TimeTag::new(e.channel, t))
                    .ok_or_else(|| Error::Data("timestamp overflow while shifting".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            events,
            duration_ps: self.duration_ps + offset_ps,
        })
    }

    /// Concatenate acquisitions back to back; each part is offset by the
    /// total duration of those before it.
    pub fn concat(parts: impl IntoIterator<Item = TimeTagStream>) -> Result<Self> {
        let mut events = Vec::new();
        let mut offset = 0u64;
        for p in parts {
            events.extend(p.events.iter().map(|e| TimeTag::new(e.channel, e.t_ps + offset)));
            offset += p.duration_ps;
        }
        Self::new(events, offset)
    }
}
