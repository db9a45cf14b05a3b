#include "eval/engine.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <tuple>

#include "core/error.hpp"

namespace agentest::eval {

// ---------------------------------------------------------------------------
// short-answer normalization

namespace {

// Decodes one UTF-8 sequence at `i`; malformed bytes come back as U+FFFD.
char32_t next_code_point(std::string_view s, std::size_t& i)
{
    auto b = static_cast<unsigned char>(s[i++]);
    if (b < 0x80)
        return b;
    int extra = (b >= 0xf0 && b < 0xf8) ? 3 : (b >= 0xe0) ? 2 : (b >= 0xc0) ? 1 : -1;
    if (extra < 0)
        return 0xfffd;
    char32_t cp = b & (0x3f >> extra);
    for (int k = 0; k < extra; ++k) {
        if (i >= s.size() || (static_cast<unsigned char>(s[i]) & 0xc0) != 0x80)
            return 0xfffd;
        cp = (cp << 6) | (static_cast<unsigned char>(s[i++]) & 0x3f);
    }
    return cp;
}

bool is_unicode_space(char32_t c)
{
    return c == ' ' || (c >= 0x09 && c <= 0x0d) || c == 0x85 || c == 0xa0 || c == 0x1680 ||
           (c >= 0x2000 && c <= 0x200a) || c == 0x2028 || c == 0x2029 || c == 0x202f ||
           c == 0x205f || c == 0x3000;
}

// ASCII letters and digits, plus any non-ASCII code point outside the
// whitespace, Latin-1 punctuation, general punctuation and CJK punctuation ranges.
bool is_word_char(char32_t c)
{
    if (c < 0x80)
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
    if (is_unicode_space(c) || c == 0xfffd)
        return false;
    if ((c >= 0x80 && c <= 0xbf) || c == 0xd7 || c == 0xf7)
        return false;
    if ((c >= 0x2000 && c <= 0x206f) || (c >= 0x3000 && c <= 0x303f) || (c >= 0xfe30 && c <= 0xfe4f))
        return false;
    return true;
}

void append_utf8(std::string& out, char32_t c)
{
    if (c < 0x80) {
        out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
        out.push_back(static_cast<char>(0xc0 | (c >> 6)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3f)));
    } else if (c < 0x10000) {
        out.push_back(static_cast<char>(0xe0 | (c >> 12)));
        out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3f)));
    } else {
        out.push_back(static_cast<char>(0xf0 | (c >> 18)));
        out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3f)));
    }
}

} // namespace

TokenSet normalize_short_answer(std::string_view text)
{
    TokenSet out;
    std::string token;
    auto flush = [&] {
        if (!token.empty() && !k_stop_words.contains(token))
            out.insert(token);
        token.clear();
    };
    for (std::size_t i = 0; i < text.size();) {
        char32_t c = next_code_point(text, i);
        if (!is_word_char(c)) {
            flush();
            continue;
        }
        if (c >= 'A' && c <= 'Z')
            c += 'a' - 'A';
        append_utf8(token, c);
    }
    flush();
    return out;
}

// ---------------------------------------------------------------------------

Value CompiledAnswer::feedback() const
{
    Value v = Value::map();
    switch (type) {
    case QuestionType::single_choice: v["option"] = option; break;
    case QuestionType::multi_choice: {
        Value l = Value::list();
        for (const auto& o : options)
            l.push_back(o);
        v["options"] = std::move(l);
        break;
    }
    case QuestionType::numeric:
        v["value"] = value;
        v["tolerance"] = tolerance;
        break;
    case QuestionType::short_answer: {
        Value l = Value::list();
        for (const auto& p : phrases)
            l.push_back(p);
        v["phrases"] = std::move(l);
        break;
    }
    }
    return v;
}

int AdaptivePolicy::next_difficulty(int current, const Rational& score) const
{
    int next = current + (score >= threshold ? step_up : step_down);
    return std::clamp(next, min_difficulty, max_difficulty);
}

void AdaptivePolicy::validate() const
{
    if (min_difficulty < 1 || max_difficulty > 5 || min_difficulty > max_difficulty)
        fail(Errc::invalid_argument, "difficulty bounds must lie within [1,5]");
    if (start_difficulty < min_difficulty || start_difficulty > max_difficulty)
        fail(Errc::invalid_argument, "start_difficulty " + std::to_string(start_difficulty) + " outside [1,5]");
    if (step_up < 0 || step_down > 0)
        fail(Errc::invalid_argument, "step_up must be >= 0 and step_down <= 0");
    if (threshold < Rational(0) || threshold > Rational(1))
        fail(Errc::invalid_argument, "threshold must lie within [0,1]");
}

const Question& EvaluationEngine::question(std::string_view id) const
{
    auto it = questions.find(std::string(id));
    if (it == questions.end())
        fail(Errc::unknown_question, "question '" + std::string(id) + "' is not part of engine '" + engine_id + "'");
    return it->second;
}

// ---------------------------------------------------------------------------

EvaluationEngine compile_engine(const Test& test, const QuestionBank& bank, const PolicyOverrides& overrides,
                                std::string engine_id)
{
    if (auto issues = validate_test(test); !issues.empty())
        fail(Errc::invalid_question, issues.front());

    EvaluationEngine e;
    e.engine_id = engine_id.empty() ? "engine:" + test.id : std::move(engine_id);
    e.test_id = test.id;
    e.title = test.title;
    e.kind = test.kind;
    e.order = test.question_ids;
    e.max_questions = overrides.max_questions.value_or(test.max_questions);
    if (e.max_questions < 1)
        fail(Errc::invalid_argument, "question count must be positive");
    e.max_questions = std::min<int>(e.max_questions, static_cast<int>(test.question_ids.size()));
    if (overrides.start_difficulty)
        e.policy.start_difficulty = *overrides.start_difficulty;
    e.policy.validate();

    std::vector<std::string> invalid;
    for (const auto& id : test.question_ids) {
        auto qit = bank.questions.find(id);
        if (qit == bank.questions.end())
            fail(Errc::unknown_question, "test '" + test.id + "' references unknown question '" + id + "'");
        auto ait = bank.answers.find(id);
        if (ait == bank.answers.end())
            fail(Errc::missing_answer, "question '" + id + "' has no expert answer");
        const Question& q = qit->second;
        const ExpertAnswer& a = ait->second;
        auto issues = validate_question(q, &a);

        CompiledAnswer c;
        c.question_id = id;
        c.type = q.type;
        c.option = a.option;
        c.options = a.options;
        c.value = a.value;
        c.tolerance = a.tolerance;
        c.phrases = a.phrases;
        for (const auto& p : a.phrases) {
            auto tokens = normalize_short_answer(p);
            if (q.type == QuestionType::short_answer && tokens.empty())
                issues.push_back(id + ": phrase '" + p + "' has no content words");
            c.phrase_tokens.push_back(std::move(tokens));
        }
        invalid.insert(invalid.end(), issues.begin(), issues.end());
        e.questions.emplace(id, q);
        e.answers.emplace(id, std::move(c));
    }
    if (!invalid.empty()) {
        std::string msg;
        for (const auto& i : invalid)
            msg += (msg.empty() ? "" : "; ") + i;
        fail(Errc::invalid_question, msg);
    }
    return e;
}

namespace {

std::optional<double> parse_number(const Value& raw)
{
    if (raw.is_number())
        return raw.as_number();
    if (raw.is_string()) {
        const auto& s = raw.as_string();
        auto first = s.find_first_not_of(' ');
        auto last = s.find_last_not_of(' ');
        if (first == std::string::npos)
            return std::nullopt;
        double d = 0;
        auto [p, ec] = std::from_chars(s.data() + first, s.data() + last + 1, d);
        if (ec == std::errc{} && p == s.data() + last + 1 && std::isfinite(d))
            return d;
    }
    return std::nullopt;
}

[[noreturn]] void mismatch(const Question& q, const Value& raw)
{
    fail(Errc::type_mismatch, "answer of kind " + std::string(kind_name(raw.kind())) + " does not fit " +
                                  std::string(to_string(q.type)) + " question '" + q.id + "'");
}

Rational jaccard(const TokenSet& a, const TokenSet& b)
{
    std::size_t common = 0;
    for (const auto& t : a)
        common += b.contains(t) ? 1 : 0;
    std::size_t all = a.size() + b.size() - common;
    return all == 0 ? Rational(0) : Rational(static_cast<std::int64_t>(common), static_cast<std::int64_t>(all));
}

} // namespace

Rational evaluate_answer(const EvaluationEngine& engine, std::string_view question_id, const Value& raw)
{
    const Question& q = engine.question(question_id);
    const CompiledAnswer& acc = engine.answers.at(q.id);
    switch (q.type) {
    case QuestionType::single_choice:
        if (!raw.is_string())
            mismatch(q, raw);
        return raw.as_string() == acc.option ? Rational(1) : Rational(0);

    case QuestionType::multi_choice: {
        if (!raw.is_list())
            mismatch(q, raw);
        std::set<std::string> selected;
        for (const auto& s : raw.as_list()) {
            if (!s.is_string())
                mismatch(q, raw);
            selected.insert(s.as_string());
        }
        std::int64_t right = 0, wrong = 0;
        for (const auto& s : selected)
            (acc.options.contains(s) ? right : wrong) += 1;
        if (right <= wrong)
            return Rational(0);
        return Rational(right - wrong, static_cast<std::int64_t>(acc.options.size()));
    }

    case QuestionType::numeric: {
        auto x = parse_number(raw);
        if (!x)
            mismatch(q, raw);
        return std::fabs(*x - acc.value) <= acc.tolerance ? Rational(1) : Rational(0);
    }

    case QuestionType::short_answer: {
        if (!raw.is_string())
            mismatch(q, raw);
        auto tokens = normalize_short_answer(raw.as_string());
        Rational best(0);
        for (const auto& phrase : acc.phrase_tokens)
            best = std::max(best, jaccard(tokens, phrase));
        return best;
    }
    }
    return Rational(0);
}

// ---------------------------------------------------------------------------

bool SessionRecord::was_asked(std::string_view question_id) const
{
    return std::any_of(asked.begin(), asked.end(),
                       [&](const AskedQuestion& a) { return a.question_id == question_id; });
}

SessionRecord start_session(const EvaluationEngine& engine, std::string session_id, std::string student)
{
    SessionRecord s;
    s.session_id = std::move(session_id);
    s.student = std::move(student);
    s.engine_id = engine.engine_id;
    s.current_difficulty = engine.policy.start_difficulty;
    return s;
}

namespace {

void check_owner(const EvaluationEngine& engine, const SessionRecord& session)
{
    if (session.engine_id != engine.engine_id)
        fail(Errc::session_mismatch,
             "session '" + session.session_id + "' belongs to engine '" + session.engine_id + "', not '" + engine.engine_id + "'");
}

} // namespace

std::optional<Question> next_question(const EvaluationEngine& engine, const SessionRecord& session)
{
    check_owner(engine, session);
    if (session.finished)
        return std::nullopt;
    if (session.issued)
        return engine.question(*session.issued);
    if (static_cast<int>(session.asked.size()) >= engine.max_questions)
        return std::nullopt;

    const Question* best = nullptr;
    auto key = [&](const Question& q) {
        return std::make_tuple(std::abs(q.difficulty - session.current_difficulty), q.difficulty, q.id);
    };
    for (const auto& id : engine.order) {
        if (session.was_asked(id))
            continue;
        const Question& q = engine.question(id);
        if (!best || key(q) < key(*best))
            best = &q;
    }
    if (!best)
        return std::nullopt;
    return *best;
}

std::optional<Question> issue_next(const EvaluationEngine& engine, SessionRecord& session)
{
    auto q = next_question(engine, session);
    if (q)
        session.issued = q->id;
    else
        finish_session(session);
    return q;
}

bool has_more(const EvaluationEngine& engine, const SessionRecord& session)
{
    if (session.finished || static_cast<int>(session.asked.size()) >= engine.max_questions)
        return false;
    for (const auto& id : engine.order)
        if (!session.was_asked(id))
            return true;
    return false;
}

SessionRecord record_answer(const EvaluationEngine& engine, SessionRecord session, std::string_view question_id,
                            const Value& raw)
{
    check_owner(engine, session);
    engine.question(question_id);
    if (session.was_asked(question_id))
        fail(Errc::duplicate_answer, "question '" + std::string(question_id) + "' was already answered");
    if (session.finished || !session.issued || *session.issued != question_id)
        fail(Errc::out_of_order, "question '" + std::string(question_id) + "' is not the question awaiting an answer");

    Rational score = evaluate_answer(engine, question_id, raw);
    session.asked.push_back({std::string(question_id), raw, score});
    session.current_difficulty = engine.policy.next_difficulty(session.current_difficulty, score);
    session.issued.reset();
    return session;
}

void finish_session(SessionRecord& session)
{
    session.finished = true;
    session.issued.reset();
}

TestResult grade_session(const EvaluationEngine& engine, const SessionRecord& session, std::int64_t timestamp_ms)
{
    check_owner(engine, session);
    if (!session.finished)
        fail(Errc::unfinished_session, "session '" + session.session_id + "' is still running");

    TestResult r;
    r.session_id = session.session_id;
    r.student = session.student;
    r.engine_id = engine.engine_id;
    r.test_id = engine.test_id;
    r.timestamp_ms = timestamp_ms;

    Rational weighted(0), total(0);
    for (const auto& a : session.asked) {
        const Question& q = engine.question(a.question_id);
        weighted += q.weight * a.score;
        total += q.weight;
        r.scores.push_back({a.question_id, q.weight, a.score, a.answer, engine.answers.at(q.id).feedback()});
    }
    r.grade = total == Rational(0) ? 0 : static_cast<int>(round_half_away(Rational(100) * weighted / total));
    return r;
}

// ---------------------------------------------------------------------------
// serialization

namespace {

Value string_list_value(const auto& items)
{
    Value l = Value::list();
    for (const auto& s : items)
        l.push_back(s);
    return l;
}

std::vector<std::string> strings_of(const Value* v)
{
    std::vector<std::string> out;
    if (v && v->is_list())
        for (const auto& s : v->as_list())
            out.push_back(s.as_string());
    return out;
}

} // namespace

Value EvaluationEngine::to_value() const
{
    Value v = Value::map();
    v["engine_id"] = engine_id;
    v["test_id"] = test_id;
    v["title"] = title;
    v["kind"] = std::string(eval::to_string(kind));
    v["max_questions"] = max_questions;
    v["order"] = string_list_value(order);
    Value qs = Value::map();
    for (const auto& [id, q] : questions)
        qs[id] = eval::to_value(q);
    v["questions"] = std::move(qs);
    Value as = Value::map();
    for (const auto& [id, a] : answers) {
        Value av = Value::map();
        av["type"] = std::string(eval::to_string(a.type));
        av["option"] = a.option;
        av["options"] = string_list_value(a.options);
        av["value"] = a.value;
        av["tolerance"] = a.tolerance;
        av["phrases"] = string_list_value(a.phrases);
        Value toks = Value::list();
        for (const auto& t : a.phrase_tokens)
            toks.push_back(string_list_value(t));
        av["phrase_tokens"] = std::move(toks);
        as[id] = std::move(av);
    }
    v["answers"] = std::move(as);
    Value p = Value::map();
    p["start_difficulty"] = policy.start_difficulty;
    p["step_up"] = policy.step_up;
    p["step_down"] = policy.step_down;
    p["threshold"] = rational_to_value(policy.threshold);
    p["min_difficulty"] = policy.min_difficulty;
    p["max_difficulty"] = policy.max_difficulty;
    v["policy"] = std::move(p);
    return v;
}

EvaluationEngine EvaluationEngine::from_value(const Value& v)
{
    EvaluationEngine e;
    e.engine_id = v.get_string("engine_id");
    e.test_id = v.get_string("test_id");
    e.title = v.get_string("title");
    e.kind = assessment_kind_from(v.get_string("kind", "self_assessment"));
    e.max_questions = static_cast<int>(v.get_int("max_questions"));
    e.order = strings_of(v.find("order"));
    if (auto* qs = v.find("questions"); qs && qs->is_map())
        for (const auto& [id, qv] : qs->as_map())
            e.questions.emplace(id, question_from_value(qv));
    if (auto* as = v.find("answers"); as && as->is_map()) {
        for (const auto& [id, av] : as->as_map()) {
            CompiledAnswer c;
            c.question_id = id;
            c.type = question_type_from(av.get_string("type"));
            c.option = av.get_string("option");
            auto opts = strings_of(av.find("options"));
            c.options.insert(opts.begin(), opts.end());
            if (auto* x = av.find("value")) c.value = x->as_number();
            if (auto* t = av.find("tolerance")) c.tolerance = t->as_number();
            c.phrases = strings_of(av.find("phrases"));
            if (auto* toks = av.find("phrase_tokens"); toks && toks->is_list()) {
                for (const auto& t : toks->as_list()) {
                    auto words = strings_of(&t);
                    c.phrase_tokens.emplace_back(words.begin(), words.end());
                }
            }
            e.answers.emplace(id, std::move(c));
        }
    }
    if (auto* p = v.find("policy")) {
        e.policy.start_difficulty = static_cast<int>(p->get_int("start_difficulty", 3));
        e.policy.step_up = static_cast<int>(p->get_int("step_up", 1));
        e.policy.step_down = static_cast<int>(p->get_int("step_down", -1));
        if (auto* t = p->find("threshold"))
            e.policy.threshold = rational_from_value(*t);
        e.policy.min_difficulty = static_cast<int>(p->get_int("min_difficulty", 1));
        e.policy.max_difficulty = static_cast<int>(p->get_int("max_difficulty", 5));
    }
    for (const auto& id : e.order)
        if (!e.questions.contains(id) || !e.answers.contains(id))
            fail(Errc::parse_error, "engine '" + e.engine_id + "' lacks question or answer '" + id + "'");
    return e;
}

Value SessionRecord::to_value() const
{
    Value v = Value::map();
    v["session_id"] = session_id;
    v["student"] = student;
    v["engine_id"] = engine_id;
    Value l = Value::list();
    for (const auto& a : asked) {
        Value av = Value::map();
        av["question_id"] = a.question_id;
        av["answer"] = a.answer;
        av["score"] = rational_to_value(a.score);
        l.push_back(std::move(av));
    }
    v["asked"] = std::move(l);
    v["current_difficulty"] = current_difficulty;
    v["finished"] = finished;
    v["issued"] = issued ? Value(*issued) : Value{};
    return v;
}

SessionRecord SessionRecord::from_value(const Value& v)
{
    SessionRecord s;
    s.session_id = v.get_string("session_id");
    s.student = v.get_string("student");
    s.engine_id = v.get_string("engine_id");
    if (auto* l = v.find("asked"); l && l->is_list()) {
        for (const auto& av : l->as_list()) {
            auto* ans = av.find("answer");
            s.asked.push_back({av.get_string("question_id"), ans ? *ans : Value{},
                               rational_from_value(*av.find("score"))});
        }
    }
    s.current_difficulty = static_cast<int>(v.get_int("current_difficulty", 3));
    s.finished = v.get_bool("finished");
    if (auto* i = v.find("issued"); i && i->is_string())
        s.issued = i->as_string();
    return s;
}

Value TestResult::to_value() const
{
    Value v = Value::map();
    v["session_id"] = session_id;
    v["student"] = student;
    v["engine_id"] = engine_id;
    v["test_id"] = test_id;
    v["grade"] = grade;
    v["timestamp_ms"] = timestamp_ms;
    Value l = Value::list();
    for (const auto& s : scores) {
        Value sv = Value::map();
        sv["question_id"] = s.question_id;
        sv["weight"] = rational_to_value(s.weight);
        sv["score"] = rational_to_value(s.score);
        sv["score_value"] = s.score.to_double();
        sv["answer"] = s.answer;
        sv["correct"] = s.correct;
        l.push_back(std::move(sv));
    }
    v["scores"] = std::move(l);
    return v;
}

TestResult TestResult::from_value(const Value& v)
{
    TestResult r;
    r.session_id = v.get_string("session_id");
    r.student = v.get_string("student");
    r.engine_id = v.get_string("engine_id");
    r.test_id = v.get_string("test_id");
    r.grade = static_cast<int>(v.get_int("grade"));
    r.timestamp_ms = v.get_int("timestamp_ms");
    if (auto* l = v.find("scores"); l && l->is_list()) {
        for (const auto& sv : l->as_list()) {
            QuestionScore s;
            s.question_id = sv.get_string("question_id");
            s.weight = weight_from_value(sv.find("weight"));
            s.score = rational_from_value(*sv.find("score"));
            if (auto* a = sv.find("answer")) s.answer = *a;
            if (auto* c = sv.find("correct")) s.correct = *c;
            r.scores.push_back(std::move(s));
        }
    }
    return r;
}

} // namespace agentest::eval
