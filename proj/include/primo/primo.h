/*
 * Stable C interface to the PRIMO core.
 *
 * Objects are opaque handles released with their *_free function. Strings
 * returned through `char**` out-parameters are NUL-terminated, heap
 * allocated by the library and released with primo_string_free. Every call
 * returns a primo_status; on failure primo_last_error() describes the
 * problem for the calling thread until its next call into the library.
 */
#ifndef PRIMO_PRIMO_H
#define PRIMO_PRIMO_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PRIMO_BUILDING_LIBRARY)
#    define PRIMO_API __declspec(dllexport)
#  else
#    define PRIMO_API __declspec(dllimport)
#  endif
#else
#  define PRIMO_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values double as process exit codes for the command-line tool. */
typedef enum primo_status {
    PRIMO_OK = 0,
    PRIMO_ERROR_DOMAIN = 1,   /* valid request the domain cannot satisfy */
    PRIMO_ERROR_USAGE = 2,    /* bad argument, malformed or wrong-schema input */
    PRIMO_INCOMPLETE = 3,     /* replayed trial never revealed its target */
    PRIMO_ERROR_INTERNAL = 4  /* invariant breach or unexpected failure */
} primo_status;

typedef enum primo_style { PRIMO_STRUCTURED = 0, PRIMO_UNSTRUCTURED = 1 } primo_style;
typedef enum primo_display { PRIMO_SELECTION = 0, PRIMO_EVERYTHING = 1 } primo_display;
typedef enum primo_pattern { PRIMO_GRID_STRUTS = 0, PRIMO_GYROID_APPROX = 1 } primo_pattern;
typedef enum primo_measure { PRIMO_TIME = 0, PRIMO_AWARENESS = 1 } primo_measure;

typedef struct primo_scene primo_scene;
typedef struct primo_session primo_session;

typedef struct primo_generate_options {
    uint64_t seed;
    int depth;
    int defects;
    int lattice_cells;
    double strut_thickness;
    primo_pattern pattern;
    int gyroid_resolution;
    primo_style style;
    primo_display display;
    int target;            /* defect id, 1-based */
    primo_measure measure;
    const char* mesh_path; /* OBJ or STL replacing the lattice; NULL for none */
    /* When participant >= 0 the scene is trial `trial_index` (0..79) of
       that participant's schedule under `master_seed`; style, display,
       target, measure and seed then come from the schedule. */
    int participant;
    int trial_index;
    uint64_t master_seed;
} primo_generate_options;

PRIMO_API const char* primo_version(void);
PRIMO_API const char* primo_last_error(void);
PRIMO_API void primo_string_free(char* text);

PRIMO_API primo_generate_options primo_generate_options_default(void);

/* Scenes */
PRIMO_API primo_status primo_scene_generate(const primo_generate_options* options, primo_scene** out);
PRIMO_API primo_status primo_scene_from_json(const char* json, size_t length, const char* base_dir, primo_scene** out);
PRIMO_API primo_status primo_scene_load_file(const char* path, primo_scene** out);
/* indent < 0 gives compact output. */
PRIMO_API primo_status primo_scene_to_json(const primo_scene* scene, int indent, char** out);
PRIMO_API primo_status primo_scene_export_obj(const primo_scene* scene, char** out);
PRIMO_API primo_status primo_scene_max_depth(const primo_scene* scene, int* out);
PRIMO_API void primo_scene_free(primo_scene* scene);

/* Headless replay of a JSONL session log. Returns PRIMO_INCOMPLETE, with
   the report still written, when the target was never revealed. */
PRIMO_API primo_status primo_replay(const primo_scene* scene, const char* log, size_t length, char** out_report);

/* Ideal operator for the scene's navigation style. Either out-parameter may be NULL. */
PRIMO_API primo_status primo_agent(const primo_scene* scene, char** out_log, char** out_report);

/* Counterbalanced schedule for n participants (a positive multiple of 4). */
PRIMO_API primo_status primo_schedule_json(int n, uint64_t master_seed, int with_trials, char** out);

/* Two-way analysis over replay reports. `out_table` may be NULL. */
PRIMO_API primo_status primo_analyze_json(const char* const* reports, size_t count, char** out_report,
                                          char** out_table);

/* Live sessions: the JSON bridge a viewer drives.
   Request:  {"op":"aim|confirm|ascend|clip|tick|answer|state|log","data":{...},"t":<ms, optional>}
   Response: {"state":{...},"rejection":<reason|null>,"derived":[...]}
   `data` follows the session-log schema for the matching event. Without
   "t" the session clock only advances through tick. */
PRIMO_API primo_status primo_session_create(const primo_scene* scene, primo_session** out);
PRIMO_API primo_status primo_session_apply(primo_session* session, const char* request, size_t length,
                                           char** out_response);
PRIMO_API primo_status primo_session_state_json(const primo_session* session, char** out);
PRIMO_API void primo_session_free(primo_session* session);

#ifdef __cplusplus
}
#endif

#endif /* PRIMO_PRIMO_H */
