#ifndef DAGBANDIT_H
#define DAGBANDIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DB_API __declspec(dllexport)
#else
#define DB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every call returns a status; on failure db_last_error() holds a message
   for the calling thread until its next failing call. */
typedef enum db_status {
  DB_OK = 0,
  DB_INVALID_ARGUMENT,
  DB_IO,
  DB_PARSE,
  DB_CYCLE_DETECTED,
  DB_NO_PATH,
  DB_TOO_MANY_PATHS,
  DB_DIMENSION_MISMATCH,
  DB_UNKNOWN_EDGE,
  DB_INVALID_PATH,
  DB_NON_POSITIVE_COORDINATE,
  DB_INFEASIBLE,
  DB_SOLVER_STALL,
  DB_ZERO_MARGINAL,
  DB_DEAD_END,
  DB_UNEQUAL_LENGTHS,
  DB_OUT_OF_RANGE_LOSS,
  DB_PROTOCOL_VIOLATION,
  DB_RANGE_VIOLATION,
  DB_MALFORMED_GAME,
  DB_NO_WALK,
  DB_CONFIG,
  DB_INTERNAL
} db_status;

typedef struct db_dag db_dag;
typedef struct db_learner db_learner;

typedef struct db_dag_info {
  int vertices;
  int edges;
  int source;
  int sink;
  double paths;       /* source-sink path count, rounded to double */
  double log2_paths;
  int longest_path;   /* in edges */
  int uniform_length; /* 1 when every path has the same length */
} db_dag_info;

DB_API const char* db_version(void);
DB_API const char* db_status_name(db_status status);
DB_API const char* db_last_error(void);

/* Strings returned through char** are owned by the caller. */
DB_API void db_string_free(char* s);

/* ---- graphs ---- */

/* Text (`n m src dst` then `tail head` lines) or JSON, picked by content. */
DB_API db_status db_dag_load(const char* path, db_dag** out);
DB_API db_status db_dag_from_edges(int vertices, int edges, const int* tails, const int* heads, int source,
                                   int sink, db_dag** out);
DB_API db_status db_dag_save(const db_dag* dag, const char* path);
DB_API void db_dag_free(db_dag* dag);

/* Requires a DAG with at least one source-sink path. */
DB_API db_status db_dag_info_get(const db_dag* dag, db_dag_info* out);

/* Structural report as JSON. Fails with DB_CYCLE_DETECTED or DB_NO_PATH
   when the graph cannot be used, the report is still written. */
DB_API db_status db_dag_validate(const db_dag* dag, char** report_json);

/* Exact path count as a decimal string. */
DB_API db_status db_dag_path_count(const db_dag* dag, char** count);

/* Min and max source-sink path weight; DB_RANGE_VIOLATION when either
   leaves [-1, 1]. `weights` has one entry per edge. */
DB_API db_status db_check_losses(const db_dag* dag, const double* weights, int count, double* min_out,
                                 double* max_out);

/* Same check on a CSV of `edge,weight` rows (missing edges weigh 0). */
DB_API db_status db_check_loss_file(const db_dag* dag, const char* path, double* min_out, double* max_out);

/* Compressed graph to `dag_path` and the per-edge original subpaths to
   `sigma_path` (JSON). */
DB_API db_status db_convert(const db_dag* dag, const char* dag_path, const char* sigma_path);

/* `spec_json` like {"domain": "mset", "d": 5, "m": 2}; returns the DAG and
   codec metadata as JSON {"dag": ..., "metadata": ...}. */
DB_API db_status db_reduce(const char* spec_json, const char* base_dir, char** result_json);

/* ---- learner ---- */

/* `config_json` fields, all optional: mode ("compressed" | "augmented" |
   "equal-length"), horizon, delta, eta, gamma, tol, seed, warm_start,
   max_solver_iterations. */
DB_API db_status db_learner_new(const db_dag* dag, const char* config_json, db_learner** out);
DB_API void db_learner_free(db_learner* learner);

/* Writes the chosen path's edge ids (input graph) into `edges`. When
   `capacity` is too small the path length is still reported in `length`
   and DB_INVALID_ARGUMENT returned; calling again before feeding returns
   the same path. */
DB_API db_status db_learner_choose(db_learner* learner, int* edges, int capacity, int* length);
DB_API db_status db_learner_feed(db_learner* learner, double loss);

/* Schedule and working-graph sizes as JSON. */
DB_API db_status db_learner_describe(const db_learner* learner, char** json);

/* ---- experiments ---- */

/* Relative paths in the config resolve against `base_dir` (NULL: "."). */
DB_API db_status db_experiment_resolve(const char* config_json, const char* base_dir, char** resolved_json);
/* Runs the grid; returns {"config": resolved, "summary": aggregate,
   "summary_csv": text}. */
DB_API db_status db_experiment_run(const char* config_json, const char* base_dir, char** result_json);

#ifdef __cplusplus
}
#endif

#endif
