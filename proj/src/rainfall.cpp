#include "suglg/rainfall.hpp"

namespace suglg {

const std::vector<RainfallRecord>& rainfall_records() {
  static const std::vector<RainfallRecord> records = {
      {"Abadeh", 1.09345684, 52.40, 31.11, 2030, false},
      {"Arsanjan", 0.48489401, 53.16, 29.56, 1703, false},
      {"Bavanat", 0.21459461, 53.40, 30.28, 2231, false},
      {"Darab", 0, 54.17, 28.47, 1098, true},
      {"Eqlid", 1.29816493, 52.38, 30.54, 2300, false},
      {"Estahban", 0.41391564, 54.02, 29.05, 1609, false},
      {"Farashband", 0.37737203, 52.06, 28.48, 782, false},
      {"Fasa", 0.47246634, 53.41, 28.56, 1288, false},
      {"Firuzabad", 0, 52.33, 28.53, 1362, true},
      {"Gerash", 0.29725655, 54.15, 27.69, 403, false},
      {"Jahrom", 0.21737661, 53.32, 28.29, 1082, false},
      {"Kavar", 0.27805494, 52.65, 29.16, 651, false},
      {"Kazerun", 0.31700190, 51.39, 29.36, 860, false},
      {"Kherameh", 0.26663226, 53.29, 29.63, 875, false},
      {"Khonj", 0.55668826, 53.40, 27.98, 511, false},
      {"Khorrambid", 0.77678033, 53.09, 30.35, 2251, false},
      {"Lamerd", 0, 53.12, 27.22, 405, true},
      {"Larestan", 0, 54.17, 27.42, 792, true},
      {"Mamasani", 0.83764997, 51.32, 30.04, 972, false},
      {"Marvdasht", 0.51173630, 52.54, 29.56, 1605, false},
      {"Mohr", 0.23188202, 52.88, 27.55, 659, false},
      {"Neyriz", 0.58328311, 54.20, 29.12, 1632, false},
      {"Pasargad", 0.74427868, 53.21, 30.19, 1614, false},
      {"Qir-o-Karzin", 0, 53.03, 28.28, 746, true},
      {"Rostam", 1.49020491, 51.51, 30.25, 864, false},
      {"Sarvestan", 0.42793923, 53.21, 29.27, 719, false},
      {"Sepidan", 1.61606073, 52.00, 30.14, 2201, false},
      {"Shiraz", 0.68990878, 52.36, 29.32, 1484, false},
      {"Zarghan", 0.22756008, 52.43, 29.47, 1596, false},
      {"Zarrindasht", 0.34310578, 54.25, 28.21, 1029, false},
  };
  return records;
}

SpatialDataset embedded_rainfall() {
  const auto& recs = rainfall_records();
  const Index n = static_cast<Index>(recs.size());
  SpatialDataset ds;
  ds.coords.resize(n, 2);
  ds.design = Matrix::Ones(n, 1);
  ds.values.resize(n);
  ds.intervals.assign(n, CensorInterval{});
  for (Index i = 0; i < n; ++i) {
    const auto& r = recs[i];
    ds.coords(i, 0) = r.longitude;
    ds.coords(i, 1) = r.latitude;
    ds.ids.push_back(r.station);
    if (r.censored) {
      ds.values[i] = std::numeric_limits<double>::quiet_NaN();
      ds.intervals[i] = CensorInterval{0.0, 0.01};
    } else {
      ds.values[i] = r.precipitation;
    }
  }
  return ds;
}

}  // namespace suglg
