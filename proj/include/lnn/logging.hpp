#pragma once

#include <functional>
#include <string_view>

namespace lnn {

using WarningSink = std::function<void(std::string_view)>;

/// Routes library warnings; the default writes "warning: ..." to stderr.
void set_warning_sink(WarningSink sink);
void warn(std::string_view message);

}  // namespace lnn
