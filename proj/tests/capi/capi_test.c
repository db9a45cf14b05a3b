/* Drives the shared library through the public C header only. */
#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#include <unistd.h>

#include "agentest/agentest.h"

static int failures = 0;

#define EXPECT(cond)                                                         \
    do {                                                                     \
        if (!(cond)) {                                                       \
            fprintf(stderr, "%s:%d: expected %s (%s: %s)\n", __FILE__, __LINE__, \
                    #cond, agentest_last_error_code(), agentest_last_error()); \
            ++failures;                                                      \
        }                                                                    \
    } while (0)

static char* token_of(const char* login_json)
{
    const char* k = strstr(login_json, "\"token\":\"");
    if (!k)
        return NULL;
    k += 9;
    char* out = malloc(64);
    size_t n = 0;
    while (k[n] && k[n] != '"' && n < 62) {
        out[n] = k[n];
        ++n;
    }
    out[n] = 0;
    return out;
}

int main(void)
{
    char* out = NULL;
    int passed = 0;

    EXPECT(strlen(agentest_version()) > 0);

    EXPECT(agentest_sim_run(AGENTEST_SOURCE_DIR "/scenarios/pull.json", NULL, &out, &passed) == AGENTEST_OK);
    EXPECT(passed == 1);
    EXPECT(out && strstr(out, "\"transcripts\""));
    agentest_string_free(out);
    out = NULL;

    EXPECT(agentest_sim_run("/no/such/scenario.json", NULL, &out, &passed) == AGENTEST_E_INVALID_ARGUMENT);
    EXPECT(out == NULL);

    EXPECT(agentest_validate(AGENTEST_SOURCE_DIR "/fixtures/sample", &out) == AGENTEST_OK);
    EXPECT(out && strstr(out, "\"question\":12"));
    agentest_string_free(out);
    out = NULL;
    EXPECT(agentest_validate(NULL, &out) == AGENTEST_E_INVALID_ARGUMENT);
    EXPECT(strcmp(agentest_last_error_code(), "invalid-argument") == 0);
    EXPECT(agentest_set_log_level("loud") == AGENTEST_E_INVALID_ARGUMENT);

    char dir[] = "/tmp/agentest-capi-XXXXXX";
    EXPECT(mkdtemp(dir) != NULL);
    char path[512];
    snprintf(path, sizeof path, "%s/deploy.json", dir);
    FILE* f = fopen(path, "w");
    fprintf(f,
            "{\"secret\":\"capi-secret-0123456789abcdef\",\"clock\":\"simulated\","
            "\"containers\":[{\"id\":\"server\"},{\"id\":\"lap\"}],"
            "\"users\":[{\"id\":\"s1\",\"role\":\"student\",\"credential\":\"pw\",\"container\":\"lap\"}],"
            "\"store\":\"store\",\"spool\":\"spool\",\"fixtures\":\"%s\",\"log_level\":\"warn\"}",
            AGENTEST_SOURCE_DIR "/fixtures/sample");
    fclose(f);

    agentest_deployment* d = NULL;
    agentest_gateway* g = NULL;
    EXPECT(agentest_deployment_open(path, &d) == AGENTEST_OK);
    EXPECT(agentest_gateway_open(d, &g) == AGENTEST_OK);

    int status = 0;
    EXPECT(agentest_gateway_handle(g, "POST", "/api/login", NULL, "{\"user\":\"s1\",\"credential\":\"pw\"}", NULL,
                                   &status, &out) == AGENTEST_OK);
    EXPECT(status == 200);
    char* token = out ? token_of(out) : NULL;
    agentest_string_free(out);
    out = NULL;
    EXPECT(token != NULL);
    if (token) {
        char auth[128];
        snprintf(auth, sizeof auth, "Bearer %s", token);
        EXPECT(agentest_gateway_handle(g, "GET", "/api/results", "student=s2", NULL, auth, &status, &out) == AGENTEST_OK);
        EXPECT(status == 403);
        agentest_string_free(out);
        out = NULL;
        EXPECT(agentest_gateway_handle(g, "POST", "/api/self-assessments", NULL, "{\"test_id\":\"algebra-practice\"}",
                                       auth, &status, &out) == AGENTEST_OK);
        EXPECT(status == 201);
        agentest_string_free(out);
        free(token);
    }

    int port = 0;
    EXPECT(agentest_gateway_bind(g, "127.0.0.1", 0, &port) == AGENTEST_OK);
    EXPECT(port > 0);

    agentest_gateway_close(g);
    agentest_deployment_close(d);

    char cmd[600];
    snprintf(cmd, sizeof cmd, "rm -rf %s", dir);
    EXPECT(system(cmd) == 0);

    if (failures)
        fprintf(stderr, "%d failures\n", failures);
    else
        printf("capi: all checks passed\n");
    return failures ? 1 : 0;
}
