#include "sas/models.hpp"

namespace agentest::sas {

// Evaluation agent. Reconstructed from the role's task list: travel, greet the
// local PAA, ask adaptively, evaluate, grade, report, terminate. "close" (exam
// window over) jumps to Finalize from every state before it.
const char* ea_task_document()
{
    return R"({
  "task": "evaluate",
  "initial": "Arriving",
  "context": ["ea", "greeting", "asked", "ev", "graded", "reported"],
  "states": [
    {"name": "Arriving", "activities": [{"name": "arrive", "result": "ea"}]},
    {"name": "Greeting", "activities": [{"name": "greet", "params": ["ea"], "result": "greeting"}]},
    {"name": "AskQuestion", "activities": [{"name": "ask", "result": "asked"}]},
    {"name": "AwaitAnswer"},
    {"name": "Evaluate", "activities": [{"name": "record", "params": ["event"], "result": "ev"}]},
    {"name": "Finalize", "activities": [{"name": "grade", "params": ["event", "greeting"], "result": "graded"}]},
    {"name": "Report", "activities": [{"name": "report", "result": "reported"}]},
    {"name": "Terminated", "activities": [{"name": "shutdown"}]}
  ],
  "transitions": [
    {"from": "Arriving", "to": "Greeting"},
    {"from": "Arriving", "to": "Finalize", "trigger": "close"},
    {"from": "Greeting", "to": "AskQuestion", "guard": "greeting.ok == true"},
    {"from": "Greeting", "to": "Finalize", "guard": "greeting.ok == false"},
    {"from": "Greeting", "to": "Finalize", "trigger": "close"},
    {"from": "AskQuestion", "to": "AwaitAnswer", "guard": "asked.ok == true",
     "transmissions": [{"kind": "external_message", "target": "$ea.paa", "event": "question",
                        "performative": "inform", "conversation": "$ea.conversation", "payload": "$asked.view"}]},
    {"from": "AskQuestion", "to": "Finalize", "guard": "asked.ok == false"},
    {"from": "AskQuestion", "to": "Finalize", "trigger": "close"},
    {"from": "AwaitAnswer", "to": "Finalize", "trigger": "answer", "guard": "event.quit == true"},
    {"from": "AwaitAnswer", "to": "Evaluate", "trigger": "answer"},
    {"from": "AwaitAnswer", "to": "Finalize", "trigger": "close"},
    {"from": "Evaluate", "to": "AwaitAnswer", "guard": "ev.ok == false",
     "transmissions": [{"kind": "external_message", "target": "$ea.paa", "event": "question",
                        "performative": "inform", "conversation": "$ea.conversation", "payload": "$ev.view"}]},
    {"from": "Evaluate", "to": "AskQuestion", "guard": "ev.more == true"},
    {"from": "Evaluate", "to": "Finalize", "guard": "ev.more == false"},
    {"from": "Evaluate", "to": "Finalize", "trigger": "close"},
    {"from": "Finalize", "to": "Report"},
    {"from": "Report", "to": "Terminated", "guard": "ea.kind == \"pull\"",
     "transmissions": [{"kind": "external_message", "target": "$ea.paa", "event": "result",
                        "performative": "inform", "conversation": "$ea.conversation", "payload": "$reported.payload"}]},
    {"from": "Report", "to": "Terminated", "guard": "ea.kind == \"push\""}
  ]
})";
}

// Server agent: one task serving pull requests, result reports, test and
// schedule administration, and the 1 s exam-window poll.
const char* sa_task_document()
{
    return R"({
  "task": "serve",
  "initial": "Boot",
  "context": ["out", "poll"],
  "states": [
    {"name": "Boot", "activities": [{"name": "arm_poll", "result": "poll"}]},
    {"name": "Idle"},
    {"name": "HandleRequest", "activities": [{"name": "plan_pull", "params": ["event"], "result": "out"}]},
    {"name": "Dispatch", "activities": [{"name": "dispatch_pull", "params": ["out"], "result": "out"}]},
    {"name": "RecordResult", "activities": [{"name": "record_result", "params": ["event"], "result": "out"}]},
    {"name": "HandleTests", "activities": [{"name": "tests_op", "params": ["event"], "result": "out"}]},
    {"name": "HandleSchedule", "activities": [{"name": "schedule_op", "params": ["event"], "result": "out"}]},
    {"name": "PollExams", "activities": [{"name": "poll_exams", "result": "poll"}]}
  ],
  "transitions": [
    {"from": "Boot", "to": "Idle"},
    {"from": "Idle", "to": "HandleRequest", "trigger": "request"},
    {"from": "HandleRequest", "to": "Dispatch", "guard": "out.ok == true",
     "transmissions": [{"kind": "external_message", "target": "$event._sender", "event": "agree",
                        "performative": "agree", "payload": "$out.agree"}]},
    {"from": "HandleRequest", "to": "Idle", "guard": "out.ok == false",
     "transmissions": [{"kind": "external_message", "target": "$event._sender", "event": "refuse",
                        "performative": "refuse", "payload": "$out"}]},
    {"from": "Dispatch", "to": "Idle", "guard": "out.ok == true"},
    {"from": "Dispatch", "to": "Idle", "guard": "out.ok == false",
     "transmissions": [{"kind": "external_message", "target": "$event._sender", "event": "failure",
                        "performative": "failure", "payload": "$out"}]},
    {"from": "Idle", "to": "RecordResult", "trigger": "result"},
    {"from": "RecordResult", "to": "Idle", "guard": "out.inform == true",
     "transmissions": [{"kind": "external_message", "target": "$out.paa", "event": "inform",
                        "performative": "inform", "payload": "$out.payload"}]},
    {"from": "RecordResult", "to": "Idle"},
    {"from": "Idle", "to": "HandleTests", "trigger": "tests"},
    {"from": "HandleTests", "to": "Idle",
     "transmissions": [{"kind": "external_message", "target": "$event._sender", "event": "tests_reply",
                        "performative": "inform", "payload": "$out"}]},
    {"from": "Idle", "to": "HandleSchedule", "trigger": "schedule"},
    {"from": "HandleSchedule", "to": "Idle",
     "transmissions": [{"kind": "external_message", "target": "$event._sender", "event": "schedule_reply",
                        "performative": "inform", "payload": "$out"}]},
    {"from": "Idle", "to": "PollExams", "trigger": "poll"},
    {"from": "PollExams", "to": "Idle"}
  ]
})";
}

// Personal assistant: bridges its human's UI actions to the SA or the visiting
// EA, and keeps a desk of what the UI should show.
const char* paa_task_document()
{
    return R"({
  "task": "desk",
  "initial": "Idle",
  "context": ["out", "upd"],
  "states": [
    {"name": "Idle"},
    {"name": "HandleUi", "activities": [{"name": "ui_action", "params": ["event"], "result": "out"}]},
    {"name": "Update", "activities": [{"name": "absorb", "params": ["event"], "result": "upd"}]}
  ],
  "transitions": [
    {"from": "Idle", "to": "HandleUi", "trigger": "ui"},
    {"from": "HandleUi", "to": "Idle", "guard": "out.send == \"request\"",
     "transmissions": [{"kind": "external_message", "target": "$out.to", "event": "request",
                        "performative": "request", "conversation": "$out.conversation", "payload": "$out.payload"}]},
    {"from": "HandleUi", "to": "Idle", "guard": "out.send == \"answer\"",
     "transmissions": [{"kind": "external_message", "target": "$out.to", "event": "answer",
                        "performative": "inform", "conversation": "$out.conversation", "payload": "$out.payload"}]},
    {"from": "HandleUi", "to": "Idle", "guard": "out.send == \"tests\"",
     "transmissions": [{"kind": "external_message", "target": "$out.to", "event": "tests",
                        "performative": "request", "conversation": "$out.conversation", "payload": "$out.payload"}]},
    {"from": "HandleUi", "to": "Idle", "guard": "out.send == \"schedule\"",
     "transmissions": [{"kind": "external_message", "target": "$out.to", "event": "schedule",
                        "performative": "request", "conversation": "$out.conversation", "payload": "$out.payload"}]},
    {"from": "HandleUi", "to": "Idle"},
    {"from": "Idle", "to": "Update", "trigger": "agree"},
    {"from": "Idle", "to": "Update", "trigger": "refuse"},
    {"from": "Idle", "to": "Update", "trigger": "failure"},
    {"from": "Idle", "to": "Update", "trigger": "question"},
    {"from": "Idle", "to": "Update", "trigger": "result"},
    {"from": "Idle", "to": "Update", "trigger": "inform"},
    {"from": "Idle", "to": "Update", "trigger": "tests_reply"},
    {"from": "Idle", "to": "Update", "trigger": "schedule_reply"},
    {"from": "Update", "to": "Idle", "guard": "upd.send == \"answer\"",
     "transmissions": [{"kind": "external_message", "target": "$upd.to", "event": "answer",
                        "performative": "inform", "conversation": "$upd.conversation", "payload": "$upd.payload"}]},
    {"from": "Update", "to": "Idle"}
  ]
})";
}

behavior::TaskModel ea_task_model()
{
    return behavior::task_model_from_json(nlohmann::json::parse(ea_task_document()));
}

behavior::TaskModel sa_task_model()
{
    return behavior::task_model_from_json(nlohmann::json::parse(sa_task_document()));
}

behavior::TaskModel paa_task_model()
{
    return behavior::task_model_from_json(nlohmann::json::parse(paa_task_document()));
}

} // namespace agentest::sas
