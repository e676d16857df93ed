#include <stdio.h>
#include <string.h>
#include "melreduce.h"

static const char *DOC =
    "{\"notes\":[{\"onset\":0,\"pitch\":60,\"duration\":1},"
    "{\"onset\":1,\"pitch\":62,\"duration\":1},"
    "{\"onset\":2,\"pitch\":60,\"duration\":1}],"
    "\"chords\":[{\"onset\":0,\"duration\":4,\"symbol\":\"C\"}]}";

int main(void) {
    MrPhraseList *list = NULL;
    if (mr_phrase_list_from_json((const uint8_t *)DOC, strlen(DOC), &list) != MR_STATUS_OK) return 1;
    if (mr_phrase_list_len(list) != 1) return 2;

    MrMelody *m = NULL;
    if (mr_reduce(list, 0, NULL, 0, &m) != MR_STATUS_OK) return 3;
    size_t n = mr_melody_len(m);
    for (size_t i = 0; i < n; i++) {
        MrNote note;
        if (mr_melody_note_at(m, i, &note) != MR_STATUS_OK) return 4;
        printf("%u %lld/%lld\n", note.pitch, (long long)note.duration_num, (long long)note.duration_den);
    }

    size_t nodes[8];
    size_t len = 0;
    double cost = 0;
    if (mr_path(list, 0, NULL, nodes, 8, &len, &cost) != MR_STATUS_OK) return 5;
    printf("path %zu %.4f\n", len, cost);

    if (mr_reduce(list, 7, NULL, 0, &m) != MR_STATUS_OUT_OF_RANGE) return 6;
    if (mr_last_error_message() == NULL) return 7;

    mr_melody_free(m);
    mr_phrase_list_free(list);
    return 0;
}
