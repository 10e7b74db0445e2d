#include "ssorl/idm/idm_io.hpp"

#include "ssorl/nn/checkpoint.hpp"

namespace ssorl::idm {

void save_idm(const std::filesystem::path& path, const IdmModel& model) {
  nn::save_checkpoint(path, model.params());
  write_json_file(path.string() + ".json", model.metadata());
}

IdmModel load_idm(const std::filesystem::path& path) {
  const Json meta = read_json_file(path.string() + ".json");
  if (meta.value("kind", std::string()) != "idm") throw std::runtime_error(path.string() + ".json is not an IDM sidecar");
  return IdmModel::from_metadata(meta, nn::load_checkpoint(path));
}

}  // namespace ssorl::idm
