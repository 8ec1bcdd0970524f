use alloc::string::String;

/// One cellphone row exactly as read from the CSV.
///
/// `hit` and `hit_count` are carried for completeness and never encoded.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawRecord {
    pub brand: String,
    pub model: String,
    pub release_date: String,
    pub weight: String,
    pub os: String,
    pub storage: String,
    pub hit: String,
    pub hit_count: String,
    pub display_size: String,
    pub display_resolution: String,
    pub camera: String,
    pub video: String,
    pub processor: String,
    pub ram: String,
    pub battery: String,
    pub battery_type: String,
    pub image_path: String,
    pub price_euro: f64,
}

/// CSV column names, in canonical order, after header normalization
/// (lower-case, runs of non-alphanumerics collapsed to `_`).
pub const CSV_COLUMNS: [&str; 18] = [
    "brand",
    "model",
    "release_date",
    "weight",
    "operation_system",
    "storage",
    "hit",
    "hit_count",
    "display_size",
    "display_resolution",
    "camera",
    "video",
    "processor",
    "ram",
    "battery",
    "battery_type",
    "picture",
    "price_euro",
];

/// Normalizes a CSV header cell: `"Price (Euro)"` → `"price_euro"`.
pub fn normalize_header(h: &str) -> String {
    let mut out = String::new();
    let mut pending = false;
    for ch in h.trim().chars() {
        if ch.is_alphanumeric() {
            if pending && !out.is_empty() {
                out.push('_');
            }
            pending = false;
            out.extend(ch.to_lowercase());
        } else {
            pending = true;
        }
    }
    match out.as_str() {
        "os" => "operation_system".into(),
        "image" | "image_path" => "picture".into(),
        "price" => "price_euro".into(),
        _ => out,
    }
}

impl RawRecord {
    /// Sets the field named by a normalized header. Unknown names are ignored.
    /// Returns `false` for an unparsable price.
    pub fn set(&mut self, column: &str, value: &str) -> bool {
        let v = String::from(value.trim());
        match column {
            "brand" => self.brand = v,
            "model" => self.model = v,
            "release_date" => self.release_date = v,
            "weight" => self.weight = v,
            "operation_system" => self.os = v,
            "storage" => self.storage = v,
            "hit" => self.hit = v,
            "hit_count" => self.hit_count = v,
            "display_size" => self.display_size = v,
            "display_resolution" => self.display_resolution = v,
            "camera" => self.camera = v,
            "video" => self.video = v,
            "processor" => self.processor = v,
            "ram" => self.ram = v,
            "battery" => self.battery = v,
            "battery_type" => self.battery_type = v,
            "picture" => self.image_path = v,
            "price_euro" => match crate::prep::leading_number(&v) {
                Some(p) => self.price_euro = p,
                None => {
                    self.price_euro = f64::NAN;
                    return false;
                }
            },
            _ => {}
        }
        true
    }
}
