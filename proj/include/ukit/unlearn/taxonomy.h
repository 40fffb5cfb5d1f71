#ifndef UKIT_UNLEARN_TAXONOMY_H_
#define UKIT_UNLEARN_TAXONOMY_H_

#include <cstdint>
#include <string>
#include <vector>

namespace ukit::unlearn {

// How a teacher quantifies knowledge. A method may combine measures
// (SCRUB retains with Loss + Rep), so this is a bit set.
enum class Measure : std::uint8_t { kNone = 0, kLoss = 1, kRep = 2, kLogit = 4 };

constexpr Measure operator|(Measure a, Measure b) {
  return static_cast<Measure>(static_cast<std::uint8_t>(a) | static_cast<std::uint8_t>(b));
}

enum class Corruption { kNone, kGrad, kData, kModel };
enum class Retention { kNone, kOriginal };
enum class Density { kDense, kSparse };
enum class Placement { kInternal, kExternal };

// One cell of the teacher-student taxonomy: the teacher on D_f is
// (forget_measure, corruption); the teacher on D_r is (retain_measure,
// retention); plus which parameters train.
struct TeacherSpec {
  Measure forget_measure = Measure::kNone;
  Corruption corruption = Corruption::kNone;
  Measure retain_measure = Measure::kNone;
  Retention retention = Retention::kNone;
  Density density = Density::kDense;
  Placement placement = Placement::kInternal;

  bool operator==(const TeacherSpec&) const = default;
};

std::string to_string(Measure m);
std::string to_string(Corruption c);
std::string to_string(Retention r);
std::string describe(const TeacherSpec& spec);

}  // namespace ukit::unlearn

#endif  // UKIT_UNLEARN_TAXONOMY_H_
