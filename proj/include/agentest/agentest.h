#ifndef AGENTEST_H
#define AGENTEST_H

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define AGENTEST_API __attribute__((visibility("default")))
#else
#define AGENTEST_API
#endif

/* Status codes. Details of the last failure on the calling thread are
   available from agentest_last_error() / agentest_last_error_code(). */
typedef enum agentest_status {
    AGENTEST_OK = 0,
    AGENTEST_E_INVALID_ARGUMENT = 1, /* bad call, config or input file */
    AGENTEST_E_PARSE = 2,
    AGENTEST_E_SCHEMA = 3,
    AGENTEST_E_IO = 4,
    AGENTEST_E_NOT_FOUND = 5,
    AGENTEST_E_TIMEOUT = 6,
    AGENTEST_E_ADDRESS_IN_USE = 7,
    AGENTEST_E_OTHER = 8,     /* any other library error, see the code name */
    AGENTEST_E_INTERNAL = 9
} agentest_status;

typedef struct agentest_deployment agentest_deployment;
typedef struct agentest_gateway agentest_gateway;

AGENTEST_API const char* agentest_version(void);

/* Message and kebab-case code name ("schema-error", ...) of the last failure
   on this thread. Valid until the next call on the same thread. */
AGENTEST_API const char* agentest_last_error(void);
AGENTEST_API const char* agentest_last_error_code(void);

/* Frees strings returned through char** out-parameters. */
AGENTEST_API void agentest_string_free(char* s);

/* trace|debug|info|warn|error|off */
AGENTEST_API int agentest_set_log_level(const char* level);

/* Runs a scenario file. *bundle_json receives the transcript bundle,
   *passed is 1 when every check held. With transcript_path set the bundle
   is also written there. */
AGENTEST_API int agentest_sim_run(const char* scenario_path, const char* transcript_path, char** bundle_json,
                                  int* passed);

/* Loads and checks a fixture directory; *report_json gets per-kind counts. */
AGENTEST_API int agentest_validate(const char* fixtures_dir, char** report_json);

/* Validates then writes fixtures into the store at store_dir. */
AGENTEST_API int agentest_seed(const char* fixtures_dir, const char* store_dir, char** counts_json);

/* Deployment from a JSON config file. */
AGENTEST_API int agentest_deployment_open(const char* config_path, agentest_deployment** out);
/* Starts worker threads (real clock only). */
AGENTEST_API int agentest_deployment_start(agentest_deployment* d);
AGENTEST_API void agentest_deployment_close(agentest_deployment* d);

/* HTTP gateway over a deployment. The deployment must outlive it. */
AGENTEST_API int agentest_gateway_open(agentest_deployment* d, agentest_gateway** out);
/* NULL host and port < 0 take the config's http settings; port 0 picks a
   free port. *bound_port receives the port. */
AGENTEST_API int agentest_gateway_bind(agentest_gateway* g, const char* host, int port, int* bound_port);
/* Blocks serving requests until agentest_gateway_stop(). */
AGENTEST_API int agentest_gateway_run(agentest_gateway* g);
AGENTEST_API void agentest_gateway_stop(agentest_gateway* g);
/* One request without a socket. query is "a=1&b=2" or NULL; authorization
   is the Authorization header value or NULL. */
AGENTEST_API int agentest_gateway_handle(agentest_gateway* g, const char* method, const char* path,
                                         const char* query, const char* body, const char* authorization,
                                         int* http_status, char** response_json);
AGENTEST_API void agentest_gateway_close(agentest_gateway* g);

#ifdef __cplusplus
}
#endif

#endif
