/* Plain C client: two routes, one of them always costs more. */
#include <stdio.h>

#include "dagbandit.h"

int main(void) {
  const int tails[] = {0, 1, 0, 2};
  const int heads[] = {1, 3, 2, 3};
  db_dag* dag = NULL;
  db_learner* learner = NULL;
  int path[8];
  int len = 0;
  int t;
  int good = 0;
  if (db_dag_from_edges(4, 4, tails, heads, 0, 3, &dag) != DB_OK) {
    fprintf(stderr, "%s\n", db_last_error());
    return 1;
  }
  if (db_learner_new(dag, "{\"mode\": \"augmented\", \"horizon\": 3000, \"seed\": 5}", &learner) != DB_OK) {
    fprintf(stderr, "%s\n", db_last_error());
    return 1;
  }
  for (t = 0; t < 3000; ++t) {
    if (db_learner_choose(learner, path, 8, &len) != DB_OK) return 1;
    if (db_learner_feed(learner, path[0] == 0 ? 0.5 : -0.5) != DB_OK) return 1;
    if (t >= 2000 && path[0] == 2) ++good;
  }
  if (db_learner_feed(learner, 0.0) != DB_PROTOCOL_VIOLATION) return 1;
  db_learner_free(learner);
  db_dag_free(dag);
  printf("good plays in the last 1000 rounds: %d\n", good);
  return good > 800 ? 0 : 1;
}
