#include <algorithm>
#include <set>

#include "acceptance.hpp"
#include "eval/engine.hpp"

namespace acceptance {

using namespace agentest;
using namespace agentest::eval;

namespace {

struct RefQuestion {
    std::string id;
    int difficulty;
};

// Scripted answer k gets credit num/den.
struct Credit {
    int num, den;
};

// Closest difficulty first, then the easier one, then the smaller id; +1 on
// credit >= 1/2, -1 below, clamped to [1,5].
std::vector<std::string> reference(const std::vector<RefQuestion>& bank, const std::vector<Credit>& script, int start,
                                   int max_questions, std::vector<int>& levels)
{
    std::vector<std::string> out;
    std::set<std::string> asked;
    int d = start;
    while (static_cast<int>(out.size()) < max_questions) {
        const RefQuestion* best = nullptr;
        for (const auto& q : bank) {
            if (asked.count(q.id))
                continue;
            auto key = [d](const RefQuestion& x) { return std::tuple(std::abs(x.difficulty - d), x.difficulty, x.id); };
            if (!best || key(q) < key(*best))
                best = &q;
        }
        if (!best)
            break;
        out.push_back(best->id);
        asked.insert(best->id);
        const Credit& c = script[out.size() - 1];
        d = std::clamp(d + (2 * c.num >= c.den ? 1 : -1), 1, 5);
        levels.push_back(d);
    }
    return out;
}

} // namespace

Outcome adaptive_policy(Rng& rng)
{
    Outcome out;
    int agree = 0, no_repeat = 0, bounded = 0, steps = 0, halves = 0;
    for (int pair = 0; pair < 200; ++pair) {
        QuestionBank bank;
        std::vector<RefQuestion> ref;
        Test test;
        test.id = "adaptive-" + std::to_string(pair);
        int n = uniform(rng, 1, 25);
        std::set<std::string> ids;
        while (static_cast<int>(ids.size()) < n)
            ids.insert("q" + random_word(rng, 1, 3));
        for (const auto& id : ids) {
            Question q;
            q.id = id;
            q.text = id;
            q.difficulty = uniform(rng, 1, 5);
            ExpertAnswer a;
            a.question_id = id;
            if (coin(rng)) {
                q.type = QuestionType::numeric;
                a.value = uniform(rng, -50, 50);
            } else {
                q.type = QuestionType::multi_choice;
                for (const char* o : {"a", "b", "c", "d", "e", "f"})
                    q.options.push_back({o, o});
                int accepted = uniform(rng, 1, 4);
                for (int i = 0; i < accepted; ++i)
                    a.options.insert(q.options[static_cast<std::size_t>(i)].id);
            }
            bank.questions[id] = q;
            bank.answers[id] = a;
            ref.push_back({id, q.difficulty});
            test.question_ids.push_back(id);
        }
        std::shuffle(test.question_ids.begin(), test.question_ids.end(), rng);
        test.max_questions = uniform(rng, 1, n);
        int start = uniform(rng, 1, 5);
        auto engine = compile_engine(test, bank, {start, std::nullopt});

        // script: a fraction of the accepted set per position (numeric: all or nothing)
        std::vector<int> picks;
        for (int i = 0; i < n; ++i)
            picks.push_back(uniform(rng, 0, 4));

        auto session = start_session(engine, "s", "student");
        std::vector<std::string> got;
        std::vector<Credit> script;
        std::vector<int> levels;
        bool in_range = true;
        while (auto q = issue_next(engine, session)) {
            const auto& a = bank.answers.at(q->id);
            int pick = picks[got.size()];
            Value answer;
            Credit credit{0, 1};
            if (q->type == QuestionType::numeric) {
                bool right = pick % 2 == 0;
                answer = a.value + (right ? 0.0 : 1.0);
                credit = {right ? 1 : 0, 1};
            } else {
                int m = static_cast<int>(a.options.size());
                int k = std::min(pick, m);
                answer = Value::list();
                int i = 0;
                for (const auto& o : a.options)
                    if (i++ < k)
                        answer.push_back(o);
                credit = {k, m};
                halves += 2 * k == m ? 1 : 0;
            }
            got.push_back(q->id);
            script.push_back(credit);
            session = record_answer(engine, std::move(session), q->id, answer);
            levels.push_back(session.current_difficulty);
            in_range = in_range && session.current_difficulty >= 1 && session.current_difficulty <= 5;
            ++steps;
        }

        std::vector<int> ref_levels;
        auto want = reference(ref, script, start, test.max_questions, ref_levels);
        if (want == got && ref_levels == levels)
            ++agree;
        else
            out.fail("pair " + std::to_string(pair) + ": engine asked " + std::to_string(got.size()) +
                     " questions, reference " + std::to_string(want.size()));
        if (std::set<std::string>(got.begin(), got.end()).size() == got.size())
            ++no_repeat;
        else
            out.fail("pair " + std::to_string(pair) + ": a question was repeated");
        bool ref_bounded = std::all_of(ref_levels.begin(), ref_levels.end(), [](int d) { return d >= 1 && d <= 5; });
        if (in_range && ref_bounded)
            ++bounded;
        else
            out.fail("pair " + std::to_string(pair) + ": difficulty left [1,5]");
    }
    out.fact(std::to_string(agree) + "/200 trajectories equal to the reference simulator (" + std::to_string(steps) +
             " answers, " + std::to_string(halves) + " at exactly 1/2)");
    out.fact(std::to_string(no_repeat) + "/200 without repeats");
    out.fact(std::to_string(bounded) + "/200 with difficulty in [1,5]");
    return out;
}

} // namespace acceptance
