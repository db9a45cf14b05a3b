#pragma once

#include "behavior/task_model.hpp"

namespace agentest::sas {

// Statecharts of the three roles, in the declarative document form.
behavior::TaskModel ea_task_model();  // task "evaluate"
behavior::TaskModel sa_task_model();  // task "serve"
behavior::TaskModel paa_task_model(); // task "desk"

const char* ea_task_document();
const char* sa_task_document();
const char* paa_task_document();

} // namespace agentest::sas
